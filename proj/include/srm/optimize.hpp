// Policy search inside a class, SRM selection over a structure, the MR
// baseline, and the class supremum used by the Rademacher estimator.
//
// Search runs in the class's free coordinates z (see free_dimension), whose
// feasible set is the box [-l, l]^dim. Each restart starts from a uniform draw in
// the box and ascends along the normalized central-difference gradient with a
// fixed step, projecting back onto the box after every move. A step that fails
// to improve is halved; a restart ends when the step drops below the probe
// width, when an accepted step gains less than convergence_tol, or after
// max_iterations steps.
#pragma once

#include "bounds.hpp"
#include "evaluation.hpp"
#include "policy.hpp"
#include "rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace srm {

struct OptimizerConfig {
    std::size_t restarts = 20;
    std::size_t max_iterations = 50;
    double step_size = 0.05;   // initial step as a fraction of the class limit
    double fd_step = 1e-3;     // central-difference probe, free-coordinate units
    double convergence_tol = 1e-6;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (restarts < 1) throw DomainError("optimizer restarts must be >= 1");
        if (!(step_size > 0.0)) throw DomainError("optimizer step_size must be positive");
        if (!(fd_step > 0.0)) throw DomainError("optimizer fd_step must be positive");
        if (!(convergence_tol > 0.0)) throw DomainError("optimizer convergence_tol must be positive");
    }

    OptimizerConfig with_seed(std::uint64_t seed) const {
        OptimizerConfig c = *this;
        c.master_seed = seed;
        return c;
    }
};

struct CandidateResult {
    PolicyParams params;
    double objective = -std::numeric_limits<double>::infinity();
    std::size_t class_index = 0;
    std::size_t restart_id = 0;
    std::size_t iterations_used = 0;
};

using ParamObjective = std::function<double(const PolicyParams&)>;

namespace detail {

inline void clamp_box(std::vector<double>& z, double lim) {
    for (double& v : z) v = std::clamp(v, -lim, lim);
}

struct RestartOutcome {
    std::vector<double> z;
    double value;
    std::size_t iterations;
};

inline RestartOutcome ascend(const PolicyClass& cls, const ParamObjective& f, const OptimizerConfig& cfg,
                             Rng& rng) {
    const double lim = magnitude_limit(cls);
    const std::size_t dim = free_dimension(cls);
    auto value = [&](const std::vector<double>& z) {
        const double v = f(expand_params(cls, z));
        if (!std::isfinite(v)) throw OptimizationError("objective is not finite");
        return v;
    };

    std::vector<double> z(dim);
    for (double& v : z) v = rng.uniform(-lim, lim);
    double fz = value(z);
    double step = cfg.step_size * lim;
    std::vector<double> grad(dim), probe(dim), next(dim);
    std::size_t it = 0;
    while (it < cfg.max_iterations && step >= cfg.fd_step) {
        ++it;
        double norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            probe = z;
            probe[i] = std::min(z[i] + cfg.fd_step, lim);
            const double hi_x = probe[i];
            const double hi = value(probe);
            probe[i] = std::max(z[i] - cfg.fd_step, -lim);
            const double lo_x = probe[i];
            const double lo = value(probe);
            grad[i] = hi_x > lo_x ? (hi - lo) / (hi_x - lo_x) : 0.0;
            norm += grad[i] * grad[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        for (std::size_t i = 0; i < dim; ++i) next[i] = z[i] + step * grad[i] / norm;
        clamp_box(next, lim);
        const double fn = value(next);
        if (fn > fz) {
            const double gain = fn - fz;
            z.swap(next);
            fz = fn;
            if (gain < cfg.convergence_tol) break;
        } else {
            step *= 0.5;
        }
    }
    return {std::move(z), fz, it};
}

} // namespace detail

// Maximizes `objective` over the class with random restarts. Restart r uses the
// seed derive_seed(master_seed, {r}), so adding restarts only adds candidates.
// The best value wins; ties go to the lower restart index.
inline CandidateResult maximize_over_class(const PolicyClass& cls, const ParamObjective& objective,
                                           const OptimizerConfig& cfg) {
    cfg.validate();
    CandidateResult best;
    best.class_index = geometry(cls).index;
    if (free_dimension(cls) == 0) {
        best.params = zero_params(cls);
        best.objective = objective(best.params);
        if (!std::isfinite(best.objective)) throw OptimizationError("objective is not finite at the zero policy");
        return best;
    }
    std::string failures;
    bool any = false;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        Rng rng(derive_seed(cfg.master_seed, {r}));
        try {
            auto out = detail::ascend(cls, objective, cfg, rng);
            if (!any || out.value > best.objective) {
                best.params = expand_params(cls, out.z);
                best.objective = out.value;
                best.restart_id = r;
                best.iterations_used = out.iterations;
                any = true;
            }
        } catch (const OptimizationError& e) {
            failures += " restart " + std::to_string(r) + ": " + e.what() + ";";
        }
    }
    if (!any)
        throw OptimizationError("all " + std::to_string(cfg.restarts) + " restarts failed in class " +
                                std::to_string(best.class_index) + ":" + failures);
    return best;
}

// Maximizes V_MFMC(pi; D) - penalty_weight * d(pi; D) over the class.
inline CandidateResult maximize_penalized_return(const PolicyClass& cls, const EvaluationContext& ctx,
                                                 const OptimizerConfig& cfg, double penalty_weight = 1.0) {
    return maximize_over_class(
        cls,
        [&](const PolicyParams& p) {
            const MfmcResult r = ctx.evaluate(cls, p);
            return r.v_mfmc - penalty_weight * r.discrepancy_d;
        },
        cfg);
}

// sup over the class of |sum_n sigma_n g_n(pi)|, found as the larger of two
// signed maximizations. The search seed depends only on (master_seed, sigma up
// to sign), so the value is a deterministic function of the sign vector.
inline SupCallback rademacher_sup_callback(const OptimizerConfig& cfg) {
    return [cfg](const PolicyClass& cls, const SignVector& sigma, const ReturnsFn& returns) {
        const std::uint64_t base = derive_seed(cfg.master_seed, {sign_fingerprint(sigma)});
        double best = 0.0;
        for (int sign : {1, -1}) {
            const OptimizerConfig run = cfg.with_seed(derive_seed(base, {static_cast<std::uint64_t>(sign + 1)}));
            try {
                const auto r = maximize_over_class(
                    cls, [&](const PolicyParams& p) { return sign * signed_sum(sigma, returns(p)); }, run);
                best = std::max(best, r.objective);
            } catch (const OptimizationError& e) {
                std::string s;
                for (int v : sigma) s += v > 0 ? '+' : '-';
                throw OptimizationError(std::string(e.what()) + " (sign vector " + s + ")");
            }
        }
        return best;
    };
}

struct SrmSelection {
    std::size_t k_hat = 0; // 1-based
    CandidateResult candidate;
    std::vector<CandidateResult> candidates; // pi-hat_k for every k
    std::vector<BoundReport> reports;        // ordered by k
};

// Index of the largest lower bound; ties resolve to the smaller index.
inline std::size_t best_report_index(const std::vector<BoundReport>& reports) {
    if (reports.empty()) throw StructuralError("no bound reports to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].lower_bound > reports[best].lower_bound) best = i;
    return best;
}

struct SrmSettings {
    OptimizerConfig search;      // inner search for pi-hat_k
    OptimizerConfig sup_search;  // supremum inside the Rademacher estimate
    std::uint64_t sign_seed = 0; // sign-vector draws
};

// Per-class seeds are derived from k, so class k's result does not depend on K.
inline SrmSelection srm_select(const PolicyStructure& structure, const EvaluationContext& ctx,
                               const ConfidenceParams& conf, const SrmSettings& s) {
    if (structure.empty()) throw StructuralError("policy structure is empty");
    conf.validate();
    SrmSelection out;
    for (std::size_t k = 0; k < structure.size(); ++k) {
        const PolicyClass& cls = structure[k];
        const std::uint64_t kk = k + 1;
        CandidateResult cand = maximize_penalized_return(cls, ctx, s.search.with_seed(derive_seed(s.search.master_seed, {kk})));
        const double rad = rademacher_estimate_rl(
            cls, ctx, conf, rademacher_sup_callback(s.sup_search.with_seed(derive_seed(s.sup_search.master_seed, {kk}))),
            derive_seed(s.sign_seed, {kk}));
        out.reports.push_back(compose_bound_report(ctx.evaluate(cls, cand.params), rad, ctx, conf, kk));
        out.candidates.push_back(std::move(cand));
    }
    const std::size_t best = best_report_index(out.reports);
    out.k_hat = best + 1;
    out.candidate = out.candidates[best];
    return out;
}

// Pure V_MFMC maximization over the largest class.
inline CandidateResult mr_select(const PolicyStructure& structure, const EvaluationContext& ctx,
                                 const OptimizerConfig& cfg) {
    if (structure.empty()) throw StructuralError("policy structure is empty");
    return maximize_penalized_return(structure.largest(), ctx,
                                     cfg.with_seed(derive_seed(cfg.master_seed, {structure.size()})), 0.0);
}

} // namespace srm
