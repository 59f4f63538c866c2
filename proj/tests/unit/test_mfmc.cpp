#include <srm/domains.hpp>
#include <srm/mfmc.hpp>
#include <srm/policy.hpp>
#include <srm/rng.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace srm;

namespace {

// Three transitions (s, a, s') with T = 2 stitching; from the worked example.
TransitionDataset tiny_pool(bool duplicate = false) {
    std::vector<Transition> ts;
    const double rows[3][3] = {{0, 0, 1}, {1, 1, 2}, {0.9, 1, 1.9}};
    const int copies = duplicate ? 2 : 1;
    for (int c = 0; c < copies; ++c)
        for (const auto& r : rows) ts.push_back({{r[0]}, {r[1]}, {r[2]}, 0.0, ts.size(), 0});
    const std::size_t n = ts.size();
    return TransitionDataset(std::move(ts), n, 1);
}

struct ConstantPolicy {
    double a;
    ActionVector operator()(const StateVector&) const { return {a}; }
};

double identity_reward(const StateVector& s) { return s[0]; }

} // namespace

TEST(TransitionDistance, Examples) {
    const auto w = DistanceWeights::unit(1, 1);
    EXPECT_DOUBLE_EQ(transition_distance({0.3}, {0.1}, {0.3}, {0.1}, w), 0.0);
    EXPECT_DOUBLE_EQ(transition_distance({0.0}, {0.0}, {1.0}, {0.5}, w), 1.5);
    DistanceWeights w2{{2.0}, {1.0}};
    EXPECT_DOUBLE_EQ(transition_distance({0.0}, {0.2}, {1.0}, {0.2}, w2), 2.0);
    EXPECT_THROW(transition_distance({0.0, 1.0}, {0.2}, {1.0}, {0.2}, w2), StructuralError);
}

TEST(TransitionDistance, SymmetricAndWeightedEuclidean) {
    DistanceWeights w{{0.5, 2.0}, {1.0}};
    EXPECT_DOUBLE_EQ(transition_distance({1, 2}, {0}, {4, 6}, {1}, w),
                     transition_distance({4, 6}, {1}, {1, 2}, {0}, w));
    EXPECT_DOUBLE_EQ(transition_distance({0, 0}, {0}, {2, 0}, {0}, w), 1.0);
    EXPECT_DOUBLE_EQ(transition_distance({0, 0}, {0}, {0, 1}, {0}, w), 2.0);
    EXPECT_DOUBLE_EQ(transition_distance({0, 0}, {0}, {6, 2}, {0}, w), 5.0);
}

TEST(HorizonCoeff, Examples) {
    EXPECT_DOUBLE_EQ(horizon_coeff(2, 5, {1.0, 1.0, 0.0}), 3.0);
    for (std::size_t t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(horizon_coeff(t, 4, {0.0, 2.0, 7.0}), 2.0);
    EXPECT_DOUBLE_EQ(horizon_coeff(0, 3, {0.5, 1.0, 1.0}), 3.0);
}

TEST(HorizonCoeff, MatchesDirectSumAndIsNonincreasing) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const LipschitzConstants L{rng.uniform(0.0, 2.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 1.5)};
        const std::size_t T = 1 + rng.next() % 12;
        const double q = L.dynamics * (1.0 + L.policy);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < T; ++t) {
            double direct = 0.0;
            for (std::size_t k = 0; k < T - t; ++k) direct += std::pow(q, static_cast<double>(k));
            direct *= L.reward;
            const double c = horizon_coeff(t, T, L);
            EXPECT_NEAR(c, direct, 1e-9 * std::max(1.0, direct));
            EXPECT_LE(c, prev * (1 + 1e-12));
            prev = c;
        }
    }
}

TEST(Stitching, WorkedExample) {
    const MfmcEvaluator ev(tiny_pool(), DistanceWeights::unit(1, 1), 2);
    const auto eps = ev.stitch(ConstantPolicy{1.0}, {0.0}, 1);
    ASSERT_EQ(eps.size(), 1u);
    EXPECT_EQ(eps[0].used_transitions, (std::vector<std::size_t>{2, 1}));
    ASSERT_EQ(eps[0].states.size(), 3u);
    EXPECT_DOUBLE_EQ(eps[0].states[1][0], 1.9);
    EXPECT_DOUBLE_EQ(eps[0].states[2][0], 2.0);
    EXPECT_NEAR(eps[0].deltas[0], 0.9, 1e-15);
    EXPECT_NEAR(eps[0].deltas[1], 0.9, 1e-15);
}

TEST(Stitching, WorkedExampleEvaluation) {
    const MfmcEvaluator ev(tiny_pool(), DistanceWeights::unit(1, 1), 2);
    const auto r = ev.evaluate(ConstantPolicy{1.0}, {0.0}, 1, {0.0, 1.0, 0.0}, identity_reward);
    EXPECT_NEAR(r.v_mfmc, 1.9, 1e-15);
    EXPECT_NEAR(r.discrepancy_d, 1.8, 1e-15);
}

TEST(Stitching, DuplicatedPoolLeavesEstimateUnchanged) {
    const MfmcEvaluator a(tiny_pool(), DistanceWeights::unit(1, 1), 2);
    const MfmcEvaluator b(tiny_pool(true), DistanceWeights::unit(1, 1), 2);
    const LipschitzConstants L{0.3, 1.0, 0.5};
    const auto ra = a.evaluate(ConstantPolicy{1.0}, {0.0}, 1, L, identity_reward);
    const auto rb = b.evaluate(ConstantPolicy{1.0}, {0.0}, 1, L, identity_reward);
    EXPECT_EQ(ra.v_mfmc, rb.v_mfmc);
    EXPECT_EQ(ra.discrepancy_d, rb.discrepancy_d);
}

TEST(Stitching, CapacityError) {
    const MfmcEvaluator ev(tiny_pool(), DistanceWeights::unit(1, 1), 2);
    try {
        ev.stitch(ConstantPolicy{1.0}, {0.0}, 2);
        FAIL() << "expected a capacity error";
    } catch (const CapacityError& e) {
        EXPECT_EQ(e.required(), 4u);
        EXPECT_EQ(e.available(), 3u);
    }
}

TEST(Stitching, TiesGoToLowestIndex) {
    std::vector<Transition> ts;
    for (std::size_t i = 0; i < 4; ++i) ts.push_back({{0.0}, {0.0}, {static_cast<double>(i)}, 0.0, i, 0});
    const MfmcEvaluator ev(TransitionDataset(ts, 4, 1), DistanceWeights::unit(1, 1), 1);
    const auto eps = ev.stitch(ConstantPolicy{0.0}, {0.0}, 3);
    EXPECT_EQ(eps[0].used_transitions[0], 0u);
    EXPECT_EQ(eps[1].used_transitions[0], 1u);
    EXPECT_EQ(eps[2].used_transitions[0], 2u);
}

TEST(Stitching, RecoversOnPolicyEpisode) {
    ToyParams p;
    p.noise = false;
    const DomainSpec d = make_toy1d(p);
    auto pi = [](const StateVector& s) { return ActionVector{0.4 - 0.9 * s[0]}; };
    DisturbanceStream noise(d, 0);
    const Episode e = simulate_episode(d, [&](const StateVector& s, std::size_t) { return pi(s); }, noise);
    const auto eps = build_artificial_episodes(pi, reindex_dataset(std::vector<Episode>{e}), 1, range_weights(d),
                                               d.start_state);
    EXPECT_EQ(eps[0].states, e.states);
    for (double delta : eps[0].deltas) EXPECT_EQ(delta, 0.0);
}

TEST(Stitching, WithoutReplacementAndDepletionCounter) {
    const DomainSpec d = make_toy1d();
    const TransitionDataset data = reindex_dataset(collect_random_dataset(d, 40, 9));
    auto pi = [](const StateVector& s) { return ActionVector{-0.5 * s[0]}; };
    const auto r = mfmc_evaluate(pi, data, 4, range_weights(d), d.lipschitz, d);
    std::vector<int> seen(data.size(), 0);
    std::size_t depleted = 0;
    for (const auto& ep : r.episodes) {
        for (std::size_t t = 0; t < ep.deltas.size(); ++t) {
            ++seen[ep.used_transitions[t]];
            EXPECT_GE(ep.deltas[t], ep.full_pool_deltas[t]);
            if (ep.deltas[t] > ep.full_pool_deltas[t]) ++depleted;
        }
        EXPECT_EQ(ep.states.front(), d.start_state);
    }
    for (int c : seen) EXPECT_LE(c, 1);
    EXPECT_EQ(depleted, r.depleted_selections);
    EXPECT_GE(r.discrepancy_d, 0.0);
    EXPECT_GE(r.v_mfmc, d.return_range.lower);
    EXPECT_LE(r.v_mfmc, d.return_range.upper);
}

TEST(Stitching, RewardsRecomputedOnStitchedStates) {
    const DomainSpec d = make_toy1d();
    const TransitionDataset data = reindex_dataset(collect_random_dataset(d, 20, 2));
    auto pi = [](const StateVector&) { return ActionVector{0.2}; };
    const auto r = mfmc_evaluate(pi, data, 2, range_weights(d), d.lipschitz, d);
    double total = 0.0;
    for (const auto& ep : r.episodes) total += episode_return(to_episode(ep, d.reward));
    EXPECT_DOUBLE_EQ(r.v_mfmc, total / 2.0);
}

TEST(Stitching, DefaultArtificialEpisodeCount) {
    EXPECT_EQ(default_n_tilde(5), 1u);
    EXPECT_EQ(default_n_tilde(10), 1u);
    EXPECT_EQ(default_n_tilde(20), 2u);
    EXPECT_EQ(default_n_tilde(100), 10u);
}

// Brute-force reference for the grid search on larger multi-dimensional pools.
TEST(Stitching, GridSearchMatchesLinearScan) {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t ds = 1 + rng.next() % 3, da = 1 + rng.next() % 2, T = 1 + rng.next() % 4;
        const std::size_t N = 5 + rng.next() % 40;
        std::vector<Transition> ts;
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t t = 0; t < T; ++t) {
                Transition tr;
                for (std::size_t i = 0; i < ds; ++i) {
                    // Coarse values force many exact ties.
                    tr.s.push_back(std::round(rng.uniform(-2, 2) * 4) / 4);
                    tr.s_next.push_back(std::round(rng.uniform(-2, 2) * 4) / 4);
                }
                for (std::size_t i = 0; i < da; ++i) tr.a.push_back(std::round(rng.uniform(-1, 1) * 4) / 4);
                tr.source_episode = n;
                tr.source_step = t;
                ts.push_back(tr);
            }
        const TransitionDataset data(ts, N, T);
        DistanceWeights w;
        for (std::size_t i = 0; i < ds; ++i) w.state_scale.push_back(rng.uniform(0.2, 3.0));
        for (std::size_t i = 0; i < da; ++i) w.action_scale.push_back(rng.uniform(0.2, 3.0));
        const double gain = rng.uniform(-1, 1);
        auto pi = [&](const StateVector& s) { return ActionVector(da, std::round(gain * s[0] * 4) / 4); };
        const std::size_t n_tilde = 1 + rng.next() % N;
        StateVector start(ds, 0.0);
        const auto eps = MfmcEvaluator(data, w).stitch(pi, start, n_tilde);

        std::vector<char> used(data.size(), 0);
        for (const auto& ep : eps) {
            StateVector s = start;
            for (std::size_t t = 0; t < T; ++t) {
                const ActionVector a = pi(s);
                std::size_t best = data.size();
                double best_d = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < data.size(); ++j) {
                    if (used[j]) continue;
                    const double dist = transition_distance(s, a, data[j].s, data[j].a, w);
                    if (dist < best_d) {
                        best_d = dist;
                        best = j;
                    }
                }
                ASSERT_EQ(ep.used_transitions[t], best);
                ASSERT_EQ(ep.deltas[t], best_d);
                used[best] = 1;
                s = data[best].s_next;
            }
        }
    }
}
