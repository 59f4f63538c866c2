// Core data model: episodes, one-step transitions, return accounting.
#pragma once

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace srm {

using StateVector = std::vector<double>;
using ActionVector = std::vector<double>;

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Bounds on the undiscounted return of a full episode, A < B.
struct ReturnRange {
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }

    void validate() const {
        if (!(std::isfinite(lower) && std::isfinite(upper)) || !(lower < upper))
            throw DomainError("return range requires finite A < B");
    }
};

// Lipschitz constants with respect to the weighted norms used by the stitching
// distance: dynamics (L_m), reward (L_rho) and policy (L_pi).
struct LipschitzConstants {
    double dynamics = 0.0;
    double reward = 0.0;
    double policy = 0.0;

    void validate() const {
        if (!(dynamics >= 0.0 && reward >= 0.0 && policy >= 0.0))
            throw DomainError("Lipschitz constants must be nonnegative");
    }
};

// s_0..s_T, a_0..a_{T-1}, rho(s_0)..rho(s_{T-1}).
struct Episode {
    std::vector<StateVector> states;
    std::vector<ActionVector> actions;
    std::vector<double> rewards;

    std::size_t horizon() const { return actions.size(); }

    void validate() const {
        if (actions.empty()) throw StructuralError("episode has no steps");
        if (states.size() != actions.size() + 1)
            throw StructuralError("episode needs |states| = |actions| + 1, got " +
                                  std::to_string(states.size()) + " states and " +
                                  std::to_string(actions.size()) + " actions");
        if (rewards.size() != actions.size())
            throw StructuralError("episode needs one reward per action");
        const std::size_t ds = states.front().size();
        const std::size_t da = actions.front().size();
        for (const auto& s : states) {
            if (s.size() != ds) throw StructuralError("episode state dimension changes");
            if (!all_finite(s)) throw StructuralError("episode state is not finite");
        }
        for (const auto& a : actions) {
            if (a.size() != da) throw StructuralError("episode action dimension changes");
            if (!all_finite(a)) throw StructuralError("episode action is not finite");
        }
    }
};

struct Transition {
    StateVector s;
    ActionVector a;
    StateVector s_next;
    double reward = 0.0; // rho(s), recorded at collection time
    std::size_t source_episode = 0;
    std::size_t source_step = 0;
};

// Immutable pool of N*T transitions. Consumers that need to mark transitions as
// used keep their own availability mask.
class TransitionDataset {
public:
    TransitionDataset() = default;

    TransitionDataset(std::vector<Transition> transitions, std::size_t episode_count,
                      std::size_t horizon)
        : transitions_(std::move(transitions)), episode_count_(episode_count), horizon_(horizon) {
        if (transitions_.size() != episode_count_ * horizon_)
            throw StructuralError("dataset holds " + std::to_string(transitions_.size()) +
                                  " transitions, expected N*T = " +
                                  std::to_string(episode_count_ * horizon_));
        if (!transitions_.empty()) {
            state_dim_ = transitions_.front().s.size();
            action_dim_ = transitions_.front().a.size();
        }
        for (const auto& t : transitions_) {
            if (t.s.size() != state_dim_ || t.s_next.size() != state_dim_ ||
                t.a.size() != action_dim_)
                throw StructuralError("dataset transitions have inconsistent dimensions");
            if (t.source_episode >= episode_count_ || t.source_step >= horizon_)
                throw StructuralError("transition source index out of range");
        }
    }

    std::size_t size() const { return transitions_.size(); }
    bool empty() const { return transitions_.empty(); }
    std::size_t episode_count() const { return episode_count_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t state_dim() const { return state_dim_; }
    std::size_t action_dim() const { return action_dim_; }

    const Transition& operator[](std::size_t i) const { return transitions_[i]; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    auto begin() const { return transitions_.begin(); }
    auto end() const { return transitions_.end(); }

private:
    std::vector<Transition> transitions_;
    std::size_t episode_count_ = 0;
    std::size_t horizon_ = 0;
    std::size_t state_dim_ = 0;
    std::size_t action_dim_ = 0;
};

inline double episode_return(const Episode& e) {
    e.validate();
    double g = 0.0;
    for (double r : e.rewards) g += r;
    return g;
}

inline double empirical_return(std::span<const Episode> episodes) {
    if (episodes.empty()) throw DomainError("empirical return of an empty episode list");
    const std::size_t T = episodes.front().horizon();
    double sum = 0.0;
    for (const auto& e : episodes) {
        if (e.horizon() != T) throw StructuralError("episodes have different horizons");
        sum += episode_return(e);
    }
    return sum / static_cast<double>(episodes.size());
}

// Affine map of [A, B] onto [-1, 0]: (g - B) / (B - A).
inline double normalize_returns(double g, const ReturnRange& range) {
    range.validate();
    const double slack = 1e-12 * range.width();
    if (!(g >= range.lower - slack && g <= range.upper + slack))
        throw RangeError("return " + std::to_string(g) + " outside [" +
                         std::to_string(range.lower) + ", " + std::to_string(range.upper) + "]");
    return std::clamp((g - range.upper) / range.width(), -1.0, 0.0);
}

inline TransitionDataset reindex_dataset(std::span<const Episode> episodes) {
    if (episodes.empty()) return {};
    const std::size_t T = episodes.front().horizon();
    std::vector<Transition> out;
    out.reserve(episodes.size() * T);
    for (std::size_t n = 0; n < episodes.size(); ++n) {
        const Episode& e = episodes[n];
        e.validate();
        if (e.horizon() != T) throw StructuralError("episodes have different horizons");
        for (std::size_t t = 0; t < T; ++t)
            out.push_back({e.states[t], e.actions[t], e.states[t + 1], e.rewards[t], n, t});
    }
    return TransitionDataset(std::move(out), episodes.size(), T);
}

// Inverse of reindex_dataset: rebuilds episodes from the source indices.
inline std::vector<Episode> group_by_episode(const TransitionDataset& data) {
    const std::size_t T = data.horizon();
    std::vector<Episode> episodes(data.episode_count());
    std::vector<std::vector<const Transition*>> slots(data.episode_count(),
                                                      std::vector<const Transition*>(T, nullptr));
    for (const auto& t : data) {
        auto& slot = slots[t.source_episode][t.source_step];
        if (slot) throw StructuralError("duplicate transition source index");
        slot = &t;
    }
    for (std::size_t n = 0; n < episodes.size(); ++n) {
        Episode& e = episodes[n];
        for (std::size_t t = 0; t < T; ++t) {
            const Transition* tr = slots[n][t];
            if (!tr) throw StructuralError("missing transition for episode " + std::to_string(n));
            if (t > 0 && tr->s != e.states.back())
                throw StructuralError("transitions of episode " + std::to_string(n) +
                                      " do not chain");
            if (t == 0) e.states.push_back(tr->s);
            e.actions.push_back(tr->a);
            e.rewards.push_back(tr->reward);
            e.states.push_back(tr->s_next);
        }
    }
    return episodes;
}

} // namespace srm
