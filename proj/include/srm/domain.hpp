// Simulator contract shared by the benchmark domains.
#pragma once

#include "mdp.hpp"
#include "rng.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace srm {

// Axis-aligned box, one closed interval per dimension.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dim() const { return lower.size(); }
    double range(std::size_t i) const { return upper[i] - lower[i]; }

    bool contains(std::span<const double> v, double tol = 0.0) const {
        if (v.size() != dim()) return false;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] < lower[i] - tol || v[i] > upper[i] + tol) return false;
        return true;
    }

    void clip(std::vector<double>& v) const {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lower[i], upper[i]);
    }

    std::vector<double> sample(Rng& rng) const {
        std::vector<double> v(dim());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.uniform(lower[i], upper[i]);
        return v;
    }

    void validate() const {
        if (lower.size() != upper.size()) throw StructuralError("box bounds differ in length");
        for (std::size_t i = 0; i < dim(); ++i)
            if (!(lower[i] <= upper[i])) throw DomainError("box has lower > upper");
    }
};

using StepFn = std::function<StateVector(const StateVector&, const ActionVector&,
                                         const std::vector<double>&)>;
using RewardFn = std::function<double(const StateVector&)>;

// (S, A, W, m, rho, s_start, T) plus the metadata the bounds need.
// Lipschitz constants are stated for the range-weighted norms returned by
// range_weights() in mfmc.hpp; the policy entry is unused here.
struct DomainSpec {
    std::string name;
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    Box state_bounds;
    Box action_bounds;
    Box disturbance_bounds;
    StateVector start_state;
    std::size_t horizon = 0;
    ReturnRange return_range;
    LipschitzConstants lipschitz;
    bool noise_enabled = true;
    StepFn step;
    RewardFn reward;

    void validate() const {
        state_bounds.validate();
        action_bounds.validate();
        disturbance_bounds.validate();
        return_range.validate();
        lipschitz.validate();
        if (state_bounds.dim() != state_dim || action_bounds.dim() != action_dim)
            throw StructuralError("domain bounds do not match declared dimensions");
        if (start_state.size() != state_dim) throw StructuralError("start state dimension");
        if (horizon == 0) throw DomainError("domain horizon must be positive");
        if (!step || !reward) throw StructuralError("domain is missing step or reward");
    }
};

// Per-step disturbances w_t drawn uniformly from the domain's disturbance box.
// Identical seeds reproduce identical draws; a noise-free domain yields zeros.
class DisturbanceStream {
public:
    DisturbanceStream(const DomainSpec& spec, std::uint64_t seed)
        : box_(&spec.disturbance_bounds), enabled_(spec.noise_enabled), seed_(seed), rng_(seed) {}

    std::vector<double> next() {
        if (!enabled_) return std::vector<double>(box_->dim(), 0.0);
        return box_->sample(rng_);
    }

    std::uint64_t seed() const { return seed_; }

private:
    const Box* box_;
    bool enabled_;
    std::uint64_t seed_;
    Rng rng_;
};

// Rolls out `choose(state, t)` from the start state for T steps.
template <class ActionChooser>
Episode simulate_episode(const DomainSpec& spec, ActionChooser&& choose, DisturbanceStream& noise) {
    Episode e;
    e.states.reserve(spec.horizon + 1);
    e.actions.reserve(spec.horizon);
    e.rewards.reserve(spec.horizon);
    StateVector s = spec.start_state;
    for (std::size_t t = 0; t < spec.horizon; ++t) {
        ActionVector a = choose(s, t);
        spec.action_bounds.clip(a);
        e.rewards.push_back(spec.reward(s));
        StateVector next = spec.step(s, a, noise.next());
        e.states.push_back(std::move(s));
        e.actions.push_back(std::move(a));
        s = std::move(next);
    }
    e.states.push_back(std::move(s));
    return e;
}

// Checks dimensions and that stored rewards match the domain's reward function.
inline void validate_episode(const Episode& e, const DomainSpec& spec) {
    e.validate();
    if (e.horizon() != spec.horizon) throw StructuralError("episode horizon differs from domain");
    if (e.states.front().size() != spec.state_dim || e.actions.front().size() != spec.action_dim)
        throw StructuralError("episode dimensions differ from domain");
    for (std::size_t t = 0; t < e.horizon(); ++t) {
        const double r = spec.reward(e.states[t]);
        if (std::abs(r - e.rewards[t]) > 1e-9 * std::max(1.0, std::abs(r)))
            throw StructuralError("stored reward at step " + std::to_string(t) +
                                  " disagrees with the domain reward");
    }
}

} // namespace srm
