// Model-free Monte Carlo evaluation: stitches artificial on-policy episodes out
// of one-step transitions and accumulates the Lipschitz discrepancy d(pi; D).
#pragma once

#include "domain.hpp"
#include "mdp.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <vector>

namespace srm {

template <class P>
concept Policy = requires(const P& p, const StateVector& s) {
    { p(s) } -> std::convertible_to<ActionVector>;
};

// Per-dimension scales of the weighted Euclidean norms ||.||_S and ||.||_A.
struct DistanceWeights {
    std::vector<double> state_scale;
    std::vector<double> action_scale;

    static DistanceWeights unit(std::size_t state_dim, std::size_t action_dim) {
        return {std::vector<double>(state_dim, 1.0), std::vector<double>(action_dim, 1.0)};
    }

    void validate() const {
        for (double w : state_scale)
            if (!(w > 0.0 && std::isfinite(w))) throw DomainError("state scales must be positive");
        for (double w : action_scale)
            if (!(w > 0.0 && std::isfinite(w))) throw DomainError("action scales must be positive");
    }
};

// Default weights: 1 / (dimension range) from the domain's bounds.
inline DistanceWeights range_weights(const DomainSpec& spec) {
    DistanceWeights w;
    for (std::size_t i = 0; i < spec.state_dim; ++i)
        w.state_scale.push_back(1.0 / spec.state_bounds.range(i));
    for (std::size_t i = 0; i < spec.action_dim; ++i)
        w.action_scale.push_back(1.0 / spec.action_bounds.range(i));
    w.validate();
    return w;
}

namespace detail {

inline double weighted_diff_norm(const double* x, const double* y, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = w[i] * (x[i] - y[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace detail

// ||s - s'||_S + ||a - a'||_A.
inline double transition_distance(const StateVector& s, const ActionVector& a,
                                  const StateVector& s2, const ActionVector& a2,
                                  const DistanceWeights& w) {
    if (s.size() != s2.size() || a.size() != a2.size() || s.size() != w.state_scale.size() ||
        a.size() != w.action_scale.size())
        throw StructuralError("transition_distance: dimension mismatch");
    return detail::weighted_diff_norm(s.data(), s2.data(), w.state_scale.data(), s.size()) +
           detail::weighted_diff_norm(a.data(), a2.data(), w.action_scale.data(), a.size());
}

// L_{T-t} = L_rho * sum_{i=0}^{T-t-1} q^i with q = L_m (1 + L_pi).
inline double horizon_coeff(std::size_t t, std::size_t T, const LipschitzConstants& L) {
    if (t >= T) throw DomainError("horizon_coeff requires t < T");
    const double q = L.dynamics * (1.0 + L.policy);
    const double terms = static_cast<double>(T - t);
    if (q == 1.0) return L.reward * terms;
    if (std::abs(q - 1.0) < 1e-6) {
        // closed form cancels badly here
        double sum = 0.0, power = 1.0;
        for (std::size_t i = 0; i < T - t; ++i, power *= q) sum += power;
        return L.reward * sum;
    }
    return L.reward * (std::pow(q, terms) - 1.0) / (q - 1.0);
}

struct ArtificialEpisode {
    std::vector<StateVector> states;   // s~_0 .. s~_T
    std::vector<ActionVector> actions; // a~_t = pi(s~_t)
    std::vector<double> deltas;        // selection distance against the depleted pool
    std::vector<double> full_pool_deltas; // same query against the whole dataset
    std::vector<std::size_t> used_transitions;
};

struct MfmcResult {
    double v_mfmc = 0.0;
    double discrepancy_d = 0.0;
    std::vector<ArtificialEpisode> episodes;
    std::vector<double> episode_returns;
    std::size_t n_tilde = 0;
    // Selections whose depleted-pool distance exceeded the full-dataset minimum.
    std::size_t depleted_selections = 0;
};

// Artificial-episode count used by default: max(1, floor(0.1 N)).
inline std::size_t default_n_tilde(std::size_t n_episodes, double fraction = 0.1) {
    const auto n = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n_episodes)));
    return std::max<std::size_t>(1, n);
}

// Holds a flattened copy of the dataset bucketed on a square grid over the
// weighted first state and first action coordinates. Each arg-min query visits
// rings of cells around the query and stops once the next ring's coordinate gap
// alone exceeds the best distance found. Results are identical to a linear
// scan, including the lowest-index tie-break.
class MfmcEvaluator {
public:
    // `horizon` overrides the dataset's T for stitching (0 keeps it); the pool
    // is then treated as an unstructured set of transitions.
    MfmcEvaluator(const TransitionDataset& data, DistanceWeights weights, std::size_t horizon = 0)
        : ds_(data.state_dim()), da_(data.action_dim()), horizon_(horizon ? horizon : data.horizon()),
          size_(data.size()), w_(std::move(weights)) {
        w_.validate();
        if (w_.state_scale.size() != ds_ || w_.action_scale.size() != da_)
            throw StructuralError("distance weights do not match dataset dimensions");
        if (ds_ == 0) throw StructuralError("dataset has no state dimensions");
        s_.reserve(size_ * ds_);
        a_.reserve(size_ * da_);
        next_.reserve(size_ * ds_);
        for (const auto& t : data) {
            s_.insert(s_.end(), t.s.begin(), t.s.end());
            a_.insert(a_.end(), t.a.begin(), t.a.end());
            next_.insert(next_.end(), t.s_next.begin(), t.s_next.end());
        }
        build_grid();
    }

    std::size_t size() const { return size_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t state_dim() const { return ds_; }
    std::size_t action_dim() const { return da_; }
    const DistanceWeights& weights() const { return w_; }

    template <Policy P>
    std::vector<ArtificialEpisode> stitch(const P& pi, const StateVector& start,
                                          std::size_t n_tilde) const {
        if (n_tilde == 0) throw DomainError("number of artificial episodes must be >= 1");
        if (start.size() != ds_) throw StructuralError("start state dimension mismatch");
        const std::size_t required = n_tilde * horizon_;
        if (required > size_)
            throw CapacityError("dataset exhausted while stitching " + std::to_string(n_tilde) +
                                    " artificial episodes",
                                required, size_);
        std::vector<char> used(size_, 0);
        std::vector<ArtificialEpisode> out(n_tilde);
        for (auto& ep : out) {
            ep.states.reserve(horizon_ + 1);
            ep.actions.reserve(horizon_);
            ep.deltas.reserve(horizon_);
            ep.full_pool_deltas.reserve(horizon_);
            ep.used_transitions.reserve(horizon_);
            ep.states.push_back(start);
            for (std::size_t t = 0; t < horizon_; ++t) {
                const StateVector& s = ep.states.back();
                ActionVector a = pi(s);
                if (a.size() != da_) throw StructuralError("policy action dimension mismatch");
                const Hit hit = nearest(s.data(), a.data(), used);
                used[hit.index] = 1;
                ep.actions.push_back(std::move(a));
                ep.deltas.push_back(hit.distance);
                ep.full_pool_deltas.push_back(hit.full_distance);
                ep.used_transitions.push_back(hit.index);
                const double* nx = next_.data() + hit.index * ds_;
                ep.states.emplace_back(nx, nx + ds_);
            }
        }
        return out;
    }

    template <Policy P>
    MfmcResult evaluate(const P& pi, const StateVector& start, std::size_t n_tilde,
                        const LipschitzConstants& L, const RewardFn& reward) const {
        L.validate();
        MfmcResult r;
        r.n_tilde = n_tilde;
        r.episodes = stitch(pi, start, n_tilde);
        std::vector<double> coeff(horizon_);
        for (std::size_t t = 0; t < horizon_; ++t) coeff[t] = horizon_coeff(t, horizon_, L);
        double total = 0.0;
        r.episode_returns.reserve(n_tilde);
        for (const auto& ep : r.episodes) {
            double g = 0.0, penalty = 0.0;
            for (std::size_t t = 0; t < horizon_; ++t) {
                g += reward(ep.states[t]);
                penalty += coeff[t] * ep.deltas[t];
                if (ep.deltas[t] > ep.full_pool_deltas[t]) ++r.depleted_selections;
            }
            r.episode_returns.push_back(g);
            total += g;
            r.discrepancy_d = std::max(r.discrepancy_d, penalty);
        }
        r.v_mfmc = total / static_cast<double>(n_tilde);
        return r;
    }

private:
    struct Hit {
        std::size_t index;
        double distance;
        double full_distance;
    };

    double distance_to(std::size_t j, const double* s, const double* a) const {
        return detail::weighted_diff_norm(s, s_.data() + j * ds_, w_.state_scale.data(), ds_) +
               detail::weighted_diff_norm(a, a_.data() + j * da_, w_.action_scale.data(), da_);
    }

    double grid_x(const double* s) const { return w_.state_scale[0] * s[0]; }
    double grid_y(const double* a) const { return da_ ? w_.action_scale[0] * a[0] : 0.0; }

    void build_grid() {
        if (size_ == 0) return;
        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        for (std::size_t j = 0; j < size_; ++j) {
            const double x = grid_x(s_.data() + j * ds_), y = grid_y(a_.data() + j * da_);
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
        // About two transitions per cell.
        const double ex = std::max(x1 - x0, 1e-12), ey = std::max(y1 - y0, 1e-12);
        const double cells = std::max(1.0, static_cast<double>(size_) / 2.0);
        cell_ = std::max({std::sqrt(ex * ey / cells), ex / 4096.0, ey / 4096.0});
        x0_ = x0;
        y0_ = y0;
        gx_ = static_cast<std::size_t>(ex / cell_) + 1;
        gy_ = static_cast<std::size_t>(ey / cell_) + 1;
        start_.assign(gx_ * gy_ + 1, 0);
        std::vector<std::size_t> cell_of(size_);
        for (std::size_t j = 0; j < size_; ++j) {
            cell_of[j] = cell_index(grid_x(s_.data() + j * ds_), grid_y(a_.data() + j * da_));
            ++start_[cell_of[j] + 1];
        }
        for (std::size_t c = 0; c < gx_ * gy_; ++c) start_[c + 1] += start_[c];
        items_.resize(size_);
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t j = 0; j < size_; ++j) items_[fill[cell_of[j]]++] = static_cast<std::uint32_t>(j);
    }

    std::size_t clamp_cell(double v, double origin, std::size_t n) const {
        const double f = std::floor((v - origin) / cell_);
        if (!(f > 0.0)) return 0;
        return std::min(static_cast<std::size_t>(f), n - 1);
    }

    std::size_t cell_index(double x, double y) const { return clamp_cell(x, x0_, gx_) * gy_ + clamp_cell(y, y0_, gy_); }

    Hit nearest(const double* s, const double* a, const std::vector<char>& used) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::size_t best = size_;
        double best_d = inf, full_d = inf;
        auto visit = [&](std::size_t i, std::size_t j) {
            const std::size_t c = i * gy_ + j;
            for (std::size_t p = start_[c]; p < start_[c + 1]; ++p) {
                const std::size_t k = items_[p];
                const double d = distance_to(k, s, a);
                full_d = std::min(full_d, d);
                if (used[k]) continue;
                if (d < best_d || (d == best_d && k < best)) {
                    best_d = d;
                    best = k;
                }
            }
        };
        const auto cx = static_cast<std::ptrdiff_t>(clamp_cell(grid_x(s), x0_, gx_));
        const auto cy = static_cast<std::ptrdiff_t>(clamp_cell(grid_y(a), y0_, gy_));
        const auto gx = static_cast<std::ptrdiff_t>(gx_), gy = static_cast<std::ptrdiff_t>(gy_);
        for (std::ptrdiff_t r = 0;; ++r) {
            const std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(cx - r, 0), i1 = std::min(cx + r, gx - 1);
            const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(cy - r, 0), j1 = std::min(cy + r, gy - 1);
            for (std::ptrdiff_t i = i0; i <= i1; ++i) {
                if (i == cx - r || i == cx + r) {
                    for (std::ptrdiff_t j = j0; j <= j1; ++j) visit(i, j);
                } else {
                    if (cy - r >= 0) visit(i, cy - r);
                    if (r > 0 && cy + r < gy) visit(i, cy + r);
                }
            }
            const bool covered = cx - r <= 0 && cx + r >= gx - 1 && cy - r <= 0 && cy + r >= gy - 1;
            if (covered) break;
            // Every cell of ring r+1 lies at least r cells away along one axis.
            // The relative margin absorbs rounding between the two expressions.
            if (best < size_ && static_cast<double>(r) * cell_ > best_d * (1.0 + 1e-12) + 1e-300) break;
        }
        if (best == size_) throw CapacityError("no available transition left", 1, 0);
        return {best, best_d, full_d};
    }

    std::size_t ds_, da_, horizon_, size_;
    DistanceWeights w_;
    std::vector<double> s_, a_, next_;
    double cell_ = 1.0, x0_ = 0.0, y0_ = 0.0;
    std::size_t gx_ = 1, gy_ = 1;
    std::vector<std::size_t> start_;
    std::vector<std::uint32_t> items_;
};

template <Policy P>
std::vector<ArtificialEpisode> build_artificial_episodes(const P& pi, const TransitionDataset& data,
                                                         std::size_t n_tilde,
                                                         const DistanceWeights& w,
                                                         const StateVector& start) {
    return MfmcEvaluator(data, w).stitch(pi, start, n_tilde);
}

template <Policy P>
MfmcResult mfmc_evaluate(const P& pi, const TransitionDataset& data, std::size_t n_tilde,
                         const DistanceWeights& w, const LipschitzConstants& L,
                         const DomainSpec& domain) {
    return MfmcEvaluator(data, w).evaluate(pi, domain.start_state, n_tilde, L, domain.reward);
}

// Stitched episode as an ordinary Episode, rewards recomputed on stitched states.
inline Episode to_episode(const ArtificialEpisode& ep, const RewardFn& reward) {
    Episode e;
    e.states = ep.states;
    e.actions = ep.actions;
    for (std::size_t t = 0; t < ep.actions.size(); ++t) e.rewards.push_back(reward(ep.states[t]));
    return e;
}

} // namespace srm
