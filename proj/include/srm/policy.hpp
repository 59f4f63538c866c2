// Policy representations, nested class structures and their Lipschitz bounds.
//
// Two representations are supported: sums of Gaussian radial basis functions
// and inverse-distance weightings of fixed anchor states. A class pairs a
// representation with a feasibility set on its parameter matrix phi (M rows, one
// column per action dimension):
//
//   magnitude  |phi_ij| <= limit
//   tying      rows k..M equal (first k-1 rows free), |phi_ij| <= cap
//
// Distances inside the basis functions use the same range-weighted Euclidean
// norm as the stitching distance, and every policy clips its output to the
// domain's action box.
#pragma once

#include "domain.hpp"
#include "mdp.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace srm {

enum class Representation { rbf, invdist };
enum class ParamScheme { magnitude, tying };

inline std::string to_string(Representation r) { return r == Representation::rbf ? "rbf" : "invdist"; }
inline std::string to_string(ParamScheme s) { return s == ParamScheme::magnitude ? "magnitude" : "tying"; }

// Row-major M x action_dim parameter matrix.
struct PolicyParams {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    PolicyParams() = default;
    PolicyParams(std::size_t m, std::size_t a, double fill = 0.0) : rows(m), cols(a), values(m * a, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    double row_norm(std::size_t i) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += (*this)(i, j) * (*this)(i, j);
        return std::sqrt(acc);
    }

    bool operator==(const PolicyParams&) const = default;
};

// Fields common to both representations.
struct ClassGeometry {
    std::vector<StateVector> centers; // s-bar_i or anchors l_i
    std::vector<double> state_scale;  // weights of ||.||_S
    Box action_bounds;
    std::size_t action_dim = 0;
    std::size_t index = 1; // position k in its structure, 1-based
};

// pi(s) = sum_i phi_i exp(-c ||s - s-bar_i||_S^2), |phi_ij| <= limit.
struct RbfPolicyClass {
    ClassGeometry geometry;
    double width = 1.0; // c
    double limit = 0.0; // l_k
};

// pi(s) = sum_i phi_i / max(||s - l_i||_S, epsilon).
struct InvDistPolicyClass {
    ClassGeometry geometry;
    double epsilon = 1e-3;
    ParamScheme scheme = ParamScheme::magnitude;
    double limit = 0.0;       // a_k for magnitude; shared cap for tying
    std::size_t untied = 1;   // tying index k: rows k..M share one value
};

using PolicyClass = std::variant<RbfPolicyClass, InvDistPolicyClass>;

inline const ClassGeometry& geometry(const PolicyClass& cls) {
    return std::visit([](const auto& c) -> const ClassGeometry& { return c.geometry; }, cls);
}

inline std::size_t basis_count(const PolicyClass& cls) { return geometry(cls).centers.size(); }

inline Representation representation(const PolicyClass& cls) {
    return std::holds_alternative<RbfPolicyClass>(cls) ? Representation::rbf : Representation::invdist;
}

inline ParamScheme scheme(const PolicyClass& cls) {
    if (const auto* inv = std::get_if<InvDistPolicyClass>(&cls)) return inv->scheme;
    return ParamScheme::magnitude;
}

// Magnitude bound on every entry of phi (l_k, a_k, or the tying cap).
inline double magnitude_limit(const PolicyClass& cls) {
    return std::visit([](const auto& c) { return c.limit; }, cls);
}

inline PolicyParams zero_params(const PolicyClass& cls) {
    const auto& g = geometry(cls);
    return PolicyParams(g.centers.size(), g.action_dim);
}

namespace detail {

inline void check_params(const PolicyParams& p, const ClassGeometry& g, const StateVector& s) {
    if (p.rows != g.centers.size() || p.cols != g.action_dim || p.values.size() != p.rows * p.cols)
        throw StructuralError("policy parameters are " + std::to_string(p.rows) + "x" +
                              std::to_string(p.cols) + ", class expects " +
                              std::to_string(g.centers.size()) + "x" + std::to_string(g.action_dim));
    if (s.size() != g.state_scale.size()) throw StructuralError("policy state dimension mismatch");
}

inline double weighted_sq_dist(const StateVector& s, const StateVector& c, const std::vector<double>& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = w[i] * (s[i] - c[i]);
        acc += d * d;
    }
    return acc;
}

} // namespace detail

inline ActionVector eval_rbf_policy(const PolicyParams& params, const RbfPolicyClass& cls,
                                    const StateVector& s) {
    const auto& g = cls.geometry;
    detail::check_params(params, g, s);
    ActionVector a(g.action_dim, 0.0);
    for (std::size_t i = 0; i < params.rows; ++i) {
        const double k = std::exp(-cls.width * detail::weighted_sq_dist(s, g.centers[i], g.state_scale));
        for (std::size_t j = 0; j < params.cols; ++j) a[j] += params(i, j) * k;
    }
    g.action_bounds.clip(a);
    return a;
}

inline ActionVector eval_invdist_policy(const PolicyParams& params, const InvDistPolicyClass& cls,
                                        const StateVector& s) {
    const auto& g = cls.geometry;
    detail::check_params(params, g, s);
    ActionVector a(g.action_dim, 0.0);
    for (std::size_t i = 0; i < params.rows; ++i) {
        const double r = std::sqrt(detail::weighted_sq_dist(s, g.centers[i], g.state_scale));
        const double k = 1.0 / std::max(r, cls.epsilon);
        for (std::size_t j = 0; j < params.cols; ++j) a[j] += params(i, j) * k;
    }
    g.action_bounds.clip(a);
    return a;
}

inline ActionVector evaluate_policy(const PolicyParams& params, const PolicyClass& cls,
                                    const StateVector& s) {
    if (const auto* rbf = std::get_if<RbfPolicyClass>(&cls)) return eval_rbf_policy(params, *rbf, s);
    return eval_invdist_policy(params, std::get<InvDistPolicyClass>(cls), s);
}

// Non-owning callable pairing a class with a parameter matrix.
class PolicyView {
public:
    PolicyView(const PolicyClass& cls, const PolicyParams& params) : cls_(&cls), params_(&params) {}
    ActionVector operator()(const StateVector& s) const { return evaluate_policy(*params_, *cls_, s); }
    const PolicyClass& policy_class() const { return *cls_; }
    const PolicyParams& params() const { return *params_; }

private:
    const PolicyClass* cls_;
    const PolicyParams* params_;
};

namespace detail {

// First row of the tied block (0-based); rows before it are free.
inline std::size_t tied_start(const InvDistPolicyClass& c) {
    return std::min(c.untied, c.geometry.centers.size()) - 1;
}

inline bool is_tying(const PolicyClass& cls) {
    const auto* inv = std::get_if<InvDistPolicyClass>(&cls);
    return inv && inv->scheme == ParamScheme::tying;
}

} // namespace detail

// Euclidean projection onto the feasible set: clamp for magnitude schemes,
// clamp then replace the tied block by its mean for tying.
inline PolicyParams project_to_class(PolicyParams params, const PolicyClass& cls) {
    const auto& g = geometry(cls);
    if (params.rows != g.centers.size() || params.cols != g.action_dim)
        throw StructuralError("projection: parameter shape does not match class");
    const double lim = magnitude_limit(cls);
    for (double& v : params.values) v = std::clamp(v, -lim, lim);
    if (detail::is_tying(cls)) {
        const std::size_t first = detail::tied_start(std::get<InvDistPolicyClass>(cls));
        for (std::size_t j = 0; j < params.cols; ++j) {
            bool equal = true;
            double sum = 0.0;
            for (std::size_t i = first; i < params.rows; ++i) {
                sum += params(i, j);
                equal = equal && params(i, j) == params(first, j);
            }
            if (equal) continue; // keeps projection exactly idempotent
            const double mean = std::clamp(sum / static_cast<double>(params.rows - first), -lim, lim);
            for (std::size_t i = first; i < params.rows; ++i) params(i, j) = mean;
        }
    }
    return params;
}

inline bool is_feasible(const PolicyParams& params, const PolicyClass& cls) {
    const auto& g = geometry(cls);
    if (params.rows != g.centers.size() || params.cols != g.action_dim) return false;
    const double lim = magnitude_limit(cls);
    for (double v : params.values)
        if (!std::isfinite(v) || std::abs(v) > lim) return false;
    if (detail::is_tying(cls)) {
        const std::size_t first = detail::tied_start(std::get<InvDistPolicyClass>(cls));
        for (std::size_t i = first + 1; i < params.rows; ++i)
            for (std::size_t j = 0; j < params.cols; ++j)
                if (params(i, j) != params(first, j)) return false;
    }
    return true;
}

// Upper bound on ||pi(s) - pi(s')|| / ||s - s'||_S (action side in plain
// Euclidean units). RBF: sum_i ||phi_i|| sqrt(2c) e^{-1/2}, the steepest slope
// of a unit Gaussian bump. Inverse distance: sum_i ||phi_i|| / epsilon^2.
inline double policy_lipschitz(const PolicyParams& params, const PolicyClass& cls) {
    double row_sum = 0.0;
    for (std::size_t i = 0; i < params.rows; ++i) row_sum += params.row_norm(i);
    if (const auto* rbf = std::get_if<RbfPolicyClass>(&cls))
        return row_sum * std::sqrt(2.0 * rbf->width) * std::exp(-0.5);
    const auto& inv = std::get<InvDistPolicyClass>(cls);
    return row_sum / (inv.epsilon * inv.epsilon);
}

// Same bound with the action side measured in the weighted norm ||.||_A.
inline double policy_lipschitz(const PolicyParams& params, const PolicyClass& cls,
                               const std::vector<double>& action_scale) {
    PolicyParams scaled = params;
    for (std::size_t i = 0; i < scaled.rows; ++i)
        for (std::size_t j = 0; j < scaled.cols; ++j) scaled(i, j) *= action_scale.at(j);
    return policy_lipschitz(scaled, cls);
}

// Largest policy_lipschitz over the feasible set (all entries at the limit).
inline double class_lipschitz(const PolicyClass& cls, const std::vector<double>& action_scale) {
    PolicyParams p = zero_params(cls);
    for (double& v : p.values) v = magnitude_limit(cls);
    return policy_lipschitz(p, cls, action_scale);
}

// ---- free parameterization used by the optimizer ---------------------------
//
// Feasible sets are boxes in a reduced coordinate vector z: all entries for
// magnitude schemes; free rows followed by one tied row for tying.

inline std::size_t free_dimension(const PolicyClass& cls) {
    const auto& g = geometry(cls);
    if (magnitude_limit(cls) == 0.0) return 0;
    if (detail::is_tying(cls))
        return (detail::tied_start(std::get<InvDistPolicyClass>(cls)) + 1) * g.action_dim;
    return g.centers.size() * g.action_dim;
}

inline PolicyParams expand_params(const PolicyClass& cls, const std::vector<double>& z) {
    PolicyParams p = zero_params(cls);
    if (z.size() != free_dimension(cls)) throw StructuralError("free parameter length mismatch");
    if (z.empty()) return p;
    if (!detail::is_tying(cls)) {
        p.values = z;
        return p;
    }
    const std::size_t first = detail::tied_start(std::get<InvDistPolicyClass>(cls));
    for (std::size_t i = 0; i < p.rows; ++i) {
        const std::size_t src = std::min(i, first);
        for (std::size_t j = 0; j < p.cols; ++j) p(i, j) = z[src * p.cols + j];
    }
    return p;
}

inline std::vector<double> contract_params(const PolicyClass& cls, const PolicyParams& p) {
    const std::size_t n = free_dimension(cls);
    return std::vector<double>(p.values.begin(), p.values.begin() + static_cast<std::ptrdiff_t>(n));
}

// ---- structures -------------------------------------------------------------

// Ordered nested classes Pi_1 within Pi_2 within ... Built from a data-free
// description only.
struct PolicyStructure {
    std::vector<PolicyClass> classes;

    std::size_t size() const { return classes.size(); }
    bool empty() const { return classes.empty(); }
    const PolicyClass& operator[](std::size_t i) const { return classes[i]; }
    const PolicyClass& largest() const { return classes.back(); }
};

struct StructureSpec {
    Representation representation = Representation::rbf;
    ParamScheme scheme = ParamScheme::magnitude;
    std::vector<StateVector> centers;
    std::vector<double> state_scale;
    Box action_bounds;
    double rbf_width = 0.0;    // 0 selects ln 2 / h^2 from the center spacing
    double epsilon = 1e-3;
    std::vector<double> limits;        // magnitude schemes, strictly increasing
    std::vector<std::size_t> untied;   // tying scheme, strictly increasing
    double tying_cap = 1.0;
};

// Evenly spaced grid with `per_dim` points per dimension spanning the box
// (a single point sits at the midpoint). The first dimension varies slowest.
inline std::vector<StateVector> grid_centers(const Box& box, const std::vector<std::size_t>& per_dim) {
    if (per_dim.size() != box.dim()) throw StructuralError("grid counts do not match box dimension");
    std::vector<StateVector> out{StateVector{}};
    for (std::size_t d = 0; d < box.dim(); ++d) {
        if (per_dim[d] == 0) throw DomainError("grid needs at least one point per dimension");
        std::vector<StateVector> next;
        for (const auto& prefix : out)
            for (std::size_t i = 0; i < per_dim[d]; ++i) {
                StateVector p = prefix;
                p.push_back(per_dim[d] == 1 ? 0.5 * (box.lower[d] + box.upper[d])
                                            : box.lower[d] + box.range(d) * static_cast<double>(i) /
                                                                 static_cast<double>(per_dim[d] - 1));
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

// Smallest weighted distance between two distinct centers.
inline double min_center_spacing(const std::vector<StateVector>& centers, const std::vector<double>& w) {
    double h = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            const double d = std::sqrt(detail::weighted_sq_dist(centers[i], centers[j], w));
            if (d > 0.0) h = std::min(h, d);
        }
    return h;
}

// Width at which a bump falls to half height at the nearest neighbouring center.
inline double half_height_width(double spacing) { return std::numbers::ln2 / (spacing * spacing); }

namespace detail {

inline PolicyParams sample_feasible(const PolicyClass& cls, Rng& rng) {
    std::vector<double> z(free_dimension(cls));
    const double lim = magnitude_limit(cls);
    for (double& v : z) v = rng.uniform(-lim, lim);
    return expand_params(cls, z);
}

} // namespace detail

inline PolicyStructure build_structure(const StructureSpec& spec) {
    if (spec.centers.empty()) throw DomainError("structure needs at least one basis center");
    for (const auto& c : spec.centers)
        if (c.size() != spec.state_scale.size()) throw StructuralError("center dimension mismatch");
    spec.action_bounds.validate();
    ClassGeometry g{spec.centers, spec.state_scale, spec.action_bounds, spec.action_bounds.dim(), 1};

    PolicyStructure out;
    if (spec.scheme == ParamScheme::magnitude) {
        if (spec.limits.empty()) throw DomainError("structure needs at least one limit");
        for (std::size_t k = 0; k < spec.limits.size(); ++k) {
            if (!(spec.limits[k] >= 0.0)) throw DomainError("limits must be nonnegative");
            if (k > 0 && !(spec.limits[k] > spec.limits[k - 1]))
                throw DomainError("limits must be strictly increasing");
        }
        double width = spec.rbf_width;
        if (spec.representation == Representation::rbf && width <= 0.0) {
            const double h = min_center_spacing(spec.centers, spec.state_scale);
            width = std::isfinite(h) ? half_height_width(h) : 1.0;
        }
        for (std::size_t k = 0; k < spec.limits.size(); ++k) {
            g.index = k + 1;
            if (spec.representation == Representation::rbf)
                out.classes.emplace_back(RbfPolicyClass{g, width, spec.limits[k]});
            else
                out.classes.emplace_back(
                    InvDistPolicyClass{g, spec.epsilon, ParamScheme::magnitude, spec.limits[k], 1});
        }
    } else {
        if (spec.representation != Representation::invdist)
            throw DomainError("tying structures use the inverse-distance representation");
        if (spec.untied.empty()) throw DomainError("tying structure needs untied counts");
        if (!(spec.tying_cap >= 0.0)) throw DomainError("tying cap must be nonnegative");
        for (std::size_t k = 0; k < spec.untied.size(); ++k) {
            if (spec.untied[k] < 1 || spec.untied[k] > spec.centers.size())
                throw DomainError("untied count must lie in [1, M]");
            if (k > 0 && !(spec.untied[k] > spec.untied[k - 1]))
                throw DomainError("untied counts must be strictly increasing");
            g.index = k + 1;
            out.classes.emplace_back(
                InvDistPolicyClass{g, spec.epsilon, ParamScheme::tying, spec.tying_cap, spec.untied[k]});
        }
    }

    // Constructive nestedness check with a fixed stream; independent of data.
    Rng rng(0x5eed);
    for (std::size_t k = 0; k + 1 < out.size(); ++k)
        for (int draw = 0; draw < 100; ++draw)
            if (!is_feasible(detail::sample_feasible(out[k], rng), out[k + 1]))
                throw DomainError("structure is not nested at class " + std::to_string(k + 1));
    return out;
}

} // namespace srm
