// Probabilistic lower bounds on return: Hoeffding terms, empirical Rademacher
// complexity, the capacity penalty Omega and the combined per-class bound.
//
// Rademacher quantities are computed on returns normalized to [-1, 0] and are
// scaled back by (B - A) when they enter a BoundReport, so every field of a
// report is in return units unless its name says otherwise.
#pragma once

#include "evaluation.hpp"
#include "rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace srm {

using SignVector = std::vector<int>;

enum class SignEnumeration { automatic, exact, sampled };
enum class RademacherEstimator { direct, surrogate };

inline std::string to_string(RademacherEstimator e) {
    return e == RademacherEstimator::direct ? "direct" : "surrogate";
}

struct ConfidenceParams {
    double delta = 0.05;
    std::size_t sigma_draws = 100;
    SignEnumeration enumeration = SignEnumeration::automatic;
    std::size_t enumerate_max_n = 12; // automatic mode enumerates up to this many signs
    RademacherEstimator estimator = RademacherEstimator::direct;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
        if (sigma_draws < 1) throw DomainError("sigma_draws must be >= 1");
    }

    bool exact_for(std::size_t n) const {
        switch (enumeration) {
        case SignEnumeration::exact: return true;
        case SignEnumeration::sampled: return false;
        default: return n <= enumerate_max_n;
        }
    }
};

// Largest n for which all 2^n sign vectors may be enumerated.
inline constexpr std::size_t kMaxEnumeratedSigns = 20;

// Two delta-events for the doubled Hoeffding term, two inside Omega.
inline constexpr int kHoeffdingEvents = 2;
inline constexpr int kOmegaEvents = 2;

// (B - A) sqrt(-ln(delta) / (2 n)).
inline double hoeffding_penalty(const ReturnRange& range, std::size_t n, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    if (n < 1) throw DomainError("hoeffding_penalty needs n >= 1");
    range.validate();
    return range.width() * std::sqrt(-std::log(delta) / (2.0 * static_cast<double>(n)));
}

// R-hat + sqrt(-8 ln(delta) / n) + sqrt(-8 ln(2 delta) / n), unitless.
inline double omega_penalty(double rademacher, std::size_t n, double delta) {
    if (!(delta > 0.0 && delta < 0.5)) throw DomainError("omega_penalty needs delta in (0, 0.5)");
    if (!(rademacher >= 0.0)) throw DomainError("rademacher estimate must be nonnegative");
    if (n < 1) throw DomainError("omega_penalty needs n >= 1");
    const double nn = static_cast<double>(n);
    return rademacher + std::sqrt(-8.0 * std::log(delta) / nn) +
           std::sqrt(-8.0 * std::log(2.0 * delta) / nn);
}

inline double rademacher_error_term(std::size_t n, double delta) {
    return std::sqrt(-8.0 * std::log(delta) / static_cast<double>(n));
}

namespace detail {

// sigma and -sigma give the same |sum|; key on the representative with sigma_1 = +1.
inline std::vector<signed char> canonical_key(const SignVector& sigma) {
    std::vector<signed char> key(sigma.size());
    const int flip = sigma.front() < 0 ? -1 : 1;
    for (std::size_t i = 0; i < sigma.size(); ++i) key[i] = static_cast<signed char>(sigma[i] * flip);
    return key;
}

} // namespace detail

// Stable 64-bit fingerprint of a sign vector up to global sign; used to seed
// per-sign-vector searches so repeated draws of the same vector agree.
inline std::uint64_t sign_fingerprint(const SignVector& sigma) {
    const auto key = detail::canonical_key(sigma);
    std::uint64_t h = 0x243f6a8885a308d3ULL ^ key.size();
    for (signed char c : key) h = splitmix64(h ^ (c > 0 ? 0x9b05688c2b3e6c1fULL : 0x1f83d9abfb41bd6bULL));
    return h;
}

// E_sigma[(2/n) class_sup(sigma)] where class_sup(sigma) = sup_f |sum_i sigma_i f(x_i)|.
// class_sup must be a deterministic function of sigma that is invariant under
// sigma -> -sigma; each distinct vector is evaluated once.
template <class ClassSup>
double rademacher_estimate_generic(ClassSup&& class_sup, std::size_t n, const ConfidenceParams& conf,
                                   std::uint64_t rng_seed) {
    conf.validate();
    if (n < 1) throw DomainError("rademacher estimate needs n >= 1");
    std::map<std::vector<signed char>, double> memo;
    auto value = [&](const SignVector& sigma) {
        auto key = detail::canonical_key(sigma);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        const double v = class_sup(sigma);
        if (!(v >= 0.0) || !std::isfinite(v))
            throw OptimizationError("class supremum is negative or not finite");
        memo.emplace(std::move(key), v);
        return v;
    };
    const double scale = 2.0 / static_cast<double>(n);
    if (conf.exact_for(n)) {
        if (n > kMaxEnumeratedSigns)
            throw CapacityError("too many sign vectors to enumerate", n, kMaxEnumeratedSigns);
        // Representatives with sigma_1 = +1 cover every vector up to sign.
        const std::uint64_t count = std::uint64_t{1} << (n - 1);
        double sum = 0.0;
        SignVector sigma(n, 1);
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            for (std::size_t i = 1; i < n; ++i) sigma[i] = ((mask >> (i - 1)) & 1U) ? -1 : 1;
            sum += value(sigma);
        }
        return scale * sum / static_cast<double>(count);
    }
    double sum = 0.0;
    SignVector sigma(n);
    for (std::size_t d = 0; d < conf.sigma_draws; ++d) {
        Rng rng(derive_seed(rng_seed, {d}));
        for (auto& s : sigma) s = rng.sign();
        sum += value(sigma);
    }
    return scale * sum / static_cast<double>(conf.sigma_draws);
}

// Normalized returns of the artificial episodes stitched for a parameter matrix.
using ReturnsFn = std::function<std::vector<double>(const PolicyParams&)>;

// sup over the class of |sum_n sigma_n g_n(pi)| for the supplied returns map.
using SupCallback = std::function<double(const PolicyClass&, const SignVector&, const ReturnsFn&)>;

inline double signed_sum(const SignVector& sigma, const std::vector<double>& g) {
    if (sigma.size() != g.size()) throw StructuralError("sign vector length differs from returns");
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += sigma[i] * g[i];
    return s;
}

// Supremum over an explicit list of parameter matrices. Exact for finite classes.
inline SupCallback finite_class_sup(std::vector<PolicyParams> members) {
    return [members = std::move(members)](const PolicyClass&, const SignVector& sigma, const ReturnsFn& g) {
        double best = 0.0;
        for (const auto& p : members) best = std::max(best, std::abs(signed_sum(sigma, g(p))));
        return best;
    };
}

// Empirical Rademacher complexity of G o Pi on [-1, 0]-normalized returns.
//
// direct:    E_sigma sup_pi (2/N~) |sum_n sigma_n g_n(pi)|, g_n the normalized
//            return of the n-th artificial episode stitched for pi.
// surrogate: -2 + (2/N~) E|sum_n sigma_n| sup_pi |V(pi) - d(pi) - c| with V, d
//            normalized and c = 2 sqrt(-ln(delta) / (2 n_h)).
// Both are clamped below at 0.
inline double rademacher_estimate_rl(const PolicyClass& cls, const EvaluationContext& ctx,
                                     const ConfidenceParams& conf, const SupCallback& sup,
                                     std::uint64_t rng_seed) {
    conf.validate();
    const std::size_t n = ctx.n_tilde();
    if (conf.estimator == RademacherEstimator::direct) {
        ReturnsFn returns = [&](const PolicyParams& p) { return ctx.normalized_returns(ctx.evaluate(cls, p)); };
        const double r = rademacher_estimate_generic(
            [&](const SignVector& sigma) { return sup(cls, sigma, returns); }, n, conf, rng_seed);
        return std::max(0.0, r);
    }
    const double width = ctx.range().width();
    const double c = 2.0 * std::sqrt(-std::log(conf.delta) / (2.0 * static_cast<double>(ctx.hoeffding_n())));
    ReturnsFn surrogate = [&](const PolicyParams& p) {
        const MfmcResult r = ctx.evaluate(cls, p);
        return std::vector<double>{normalize_returns(r.v_mfmc, ctx.range()) - r.discrepancy_d / width - c};
    };
    const double sup_value = sup(cls, SignVector{1}, surrogate);
    const double mean_abs_sum = rademacher_estimate_generic(
        [](const SignVector& sigma) {
            int s = 0;
            for (int v : sigma) s += v;
            return static_cast<double>(std::abs(s));
        },
        n, conf, rng_seed);
    return std::max(0.0, mean_abs_sum * sup_value - 2.0);
}

struct BoundReport {
    std::size_t class_index = 0;
    double v_mfmc = 0.0;
    double discrepancy_d = 0.0;
    double hoeffding_term = 0.0;       // (B-A) sqrt(-ln delta / 2 n_h); enters twice
    double rademacher_estimate = 0.0;  // (B-A) R-hat
    double rademacher_error_term = 0.0; // (B-A) sqrt(-8 ln delta / N~)
    double omega = 0.0;                // (B-A) Omega, includes the two terms above
    double lower_bound = 0.0;
    int confidence_multiplier = 0;     // the bound holds w.p. >= 1 - multiplier * delta
    double rademacher_normalized = 0.0; // R-hat on the [-1, 0] scale
    std::size_t hoeffding_n = 0;
    HoeffdingCount hoeffding_count = HoeffdingCount::n_tilde;
    RademacherEstimator estimator = RademacherEstimator::direct;
};

// Assembles V_MFMC - d - 2 hoeffding - Omega from an MFMC result and a
// normalized Rademacher estimate.
inline BoundReport compose_bound_report(const MfmcResult& mfmc, double rademacher_normalized,
                                        const EvaluationContext& ctx, const ConfidenceParams& conf,
                                        std::size_t class_index) {
    conf.validate();
    const double width = ctx.range().width();
    BoundReport r;
    r.class_index = class_index;
    r.v_mfmc = mfmc.v_mfmc;
    r.discrepancy_d = mfmc.discrepancy_d;
    r.hoeffding_n = ctx.hoeffding_n();
    r.hoeffding_count = ctx.settings().hoeffding_count;
    r.estimator = conf.estimator;
    r.hoeffding_term = hoeffding_penalty(ctx.range(), r.hoeffding_n, conf.delta);
    r.rademacher_normalized = rademacher_normalized;
    r.rademacher_estimate = width * rademacher_normalized;
    r.rademacher_error_term = width * rademacher_error_term(ctx.n_tilde(), conf.delta);
    r.omega = width * omega_penalty(rademacher_normalized, ctx.n_tilde(), conf.delta);
    r.confidence_multiplier = kHoeffdingEvents + kOmegaEvents;
    r.lower_bound = r.v_mfmc - r.discrepancy_d - 2.0 * r.hoeffding_term - r.omega;
    return r;
}

// Lower bound on V(pi) holding for every policy of `cls` simultaneously.
inline BoundReport lower_bound_return(const PolicyParams& params, const PolicyClass& cls,
                                      const EvaluationContext& ctx, const ConfidenceParams& conf,
                                      const SupCallback& sup, std::uint64_t rng_seed) {
    if (!is_feasible(params, cls)) throw DomainError("policy is not a member of the class");
    const MfmcResult mfmc = ctx.evaluate(cls, params);
    const double rad = rademacher_estimate_rl(cls, ctx, conf, sup, rng_seed);
    return compose_bound_report(mfmc, rad, ctx, conf, geometry(cls).index);
}

// Single-policy bound V_MFMC - d - (B-A) sqrt(-ln delta / 2n).
inline double mfmc_pac_lower_bound(const MfmcResult& result, const ReturnRange& range, std::size_t n,
                                   double delta) {
    return result.v_mfmc - result.discrepancy_d - hoeffding_penalty(range, n, delta);
}

} // namespace srm
