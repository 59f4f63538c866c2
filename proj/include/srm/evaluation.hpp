// Binds a domain, a transition dataset and the estimator settings so that the
// bounds and the optimizer can evaluate any (class, parameters) pair.
#pragma once

#include "domain.hpp"
#include "mfmc.hpp"
#include "policy.hpp"

#include <optional>
#include <string>

namespace srm {

// Sample count in the Hoeffding terms: the artificial-episode count or the
// number of data episodes.
enum class HoeffdingCount { n_tilde, n_episodes };

// Which L_pi enters d(pi; D): the evaluated policy's own bound, or the largest
// bound over its class.
enum class PolicyLipschitzMode { per_policy, class_bound };

inline std::string to_string(HoeffdingCount c) { return c == HoeffdingCount::n_tilde ? "n_tilde" : "n_episodes"; }
inline std::string to_string(PolicyLipschitzMode m) {
    return m == PolicyLipschitzMode::per_policy ? "policy" : "class";
}

struct EvaluationSettings {
    std::optional<std::size_t> n_tilde; // default: max(1, floor(0.1 N))
    double n_tilde_fraction = 0.1;
    std::optional<DistanceWeights> weights; // default: range_weights(domain)
    PolicyLipschitzMode lipschitz_mode = PolicyLipschitzMode::per_policy;
    HoeffdingCount hoeffding_count = HoeffdingCount::n_tilde;
};

class EvaluationContext {
public:
    // The domain must outlive the context; the dataset is copied.
    EvaluationContext(const DomainSpec& domain, const TransitionDataset& data,
                      EvaluationSettings settings = {})
        : domain_(&domain), settings_(settings),
          weights_(settings.weights ? *settings.weights : range_weights(domain)),
          evaluator_(data, weights_), n_episodes_(data.episode_count()),
          n_tilde_(settings.n_tilde ? *settings.n_tilde
                                    : default_n_tilde(data.episode_count(), settings.n_tilde_fraction)) {
        domain.validate();
        if (data.state_dim() != domain.state_dim || data.action_dim() != domain.action_dim)
            throw ValidationError("dataset dimensions do not match domain " + domain.name);
        if (data.horizon() != domain.horizon)
            throw ValidationError("dataset horizon " + std::to_string(data.horizon()) +
                                  " differs from domain horizon " + std::to_string(domain.horizon));
        if (n_tilde_ == 0) throw DomainError("number of artificial episodes must be >= 1");
        if (n_tilde_ * domain.horizon > data.size())
            throw CapacityError("dataset too small for " + std::to_string(n_tilde_) +
                                    " artificial episodes; use fewer artificial episodes or more data",
                                n_tilde_ * domain.horizon, data.size());
    }

    const DomainSpec& domain() const { return *domain_; }
    const EvaluationSettings& settings() const { return settings_; }
    const DistanceWeights& weights() const { return weights_; }
    const MfmcEvaluator& evaluator() const { return evaluator_; }
    const ReturnRange& range() const { return domain_->return_range; }
    std::size_t n_tilde() const { return n_tilde_; }
    std::size_t n_episodes() const { return n_episodes_; }

    std::size_t hoeffding_n() const {
        return settings_.hoeffding_count == HoeffdingCount::n_tilde ? n_tilde_ : n_episodes_;
    }

    LipschitzConstants lipschitz_for(const PolicyClass& cls, const PolicyParams& params) const {
        LipschitzConstants L = domain_->lipschitz;
        L.policy = settings_.lipschitz_mode == PolicyLipschitzMode::per_policy
                       ? policy_lipschitz(params, cls, weights_.action_scale)
                       : class_lipschitz(cls, weights_.action_scale);
        return L;
    }

    MfmcResult evaluate(const PolicyClass& cls, const PolicyParams& params) const {
        return evaluator_.evaluate(PolicyView(cls, params), domain_->start_state, n_tilde_,
                                   lipschitz_for(cls, params), domain_->reward);
    }

    // Stitched episode returns mapped onto [-1, 0].
    std::vector<double> normalized_returns(const MfmcResult& r) const {
        std::vector<double> g;
        g.reserve(r.episode_returns.size());
        for (double x : r.episode_returns) g.push_back(normalize_returns(x, range()));
        return g;
    }

private:
    const DomainSpec* domain_;
    EvaluationSettings settings_;
    DistanceWeights weights_;
    MfmcEvaluator evaluator_;
    std::size_t n_episodes_;
    std::size_t n_tilde_;
};

} // namespace srm
