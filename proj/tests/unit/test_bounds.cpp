#include <srm/bounds.hpp>
#include <srm/domains.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace srm;

namespace {

ConfidenceParams exact_conf() {
    ConfidenceParams c;
    c.enumeration = SignEnumeration::exact;
    return c;
}

ConfidenceParams sampled_conf(std::size_t draws) {
    ConfidenceParams c;
    c.enumeration = SignEnumeration::sampled;
    c.sigma_draws = draws;
    return c;
}

// sup over a finite list of fixed value vectors.
auto fixed_class(std::vector<std::vector<double>> fs) {
    return [fs = std::move(fs)](const SignVector& sigma) {
        double best = 0.0;
        for (const auto& f : fs) best = std::max(best, std::abs(signed_sum(sigma, f)));
        return best;
    };
}

struct ToyFixture {
    DomainSpec domain = make_toy1d();
    TransitionDataset data = reindex_dataset(collect_random_dataset(domain, 20, 5));
    EvaluationContext ctx{domain, data};
    PolicyStructure structure;

    ToyFixture() {
        StructureSpec s;
        s.centers = grid_centers(domain.state_bounds, {4});
        s.state_scale = range_weights(domain).state_scale;
        s.action_bounds = domain.action_bounds;
        s.limits = {0.0, 0.5};
        structure = build_structure(s);
    }
};

PolicyParams filled(double v) { return PolicyParams(4, 1, v); }

} // namespace

TEST(HoeffdingPenalty, Examples) {
    const ReturnRange unit{0.0, 1.0};
    EXPECT_NEAR(hoeffding_penalty(unit, 1, std::exp(-2.0)), 1.0, 1e-15);
    EXPECT_LT(hoeffding_penalty(unit, 1, 1.0 - 1e-12), 1e-5);
    EXPECT_NEAR(hoeffding_penalty(unit, 40, 0.05), 2.0 * hoeffding_penalty(unit, 160, 0.05), 1e-15);
    EXPECT_THROW(hoeffding_penalty(unit, 1, 0.0), DomainError);
    EXPECT_THROW(hoeffding_penalty(unit, 1, 1.0), DomainError);
    EXPECT_THROW(hoeffding_penalty(unit, 0, 0.5), DomainError);
}

TEST(HoeffdingPenalty, RootNScalingAndMonotone) {
    const ReturnRange r{-50.0, 0.0};
    const double base = hoeffding_penalty(r, 1, 0.05);
    for (std::size_t n = 1; n < 500; ++n) {
        EXPECT_NEAR(hoeffding_penalty(r, n, 0.05) * std::sqrt(static_cast<double>(n)), base, 1e-12 * base);
        EXPECT_GT(hoeffding_penalty(r, n, 0.05), hoeffding_penalty(r, n + 1, 0.05));
    }
    for (double d = 0.01; d < 0.95; d += 0.01) EXPECT_GT(hoeffding_penalty(r, 10, d), hoeffding_penalty(r, 10, d + 0.01));
}

TEST(RademacherGeneric, Examples) {
    EXPECT_DOUBLE_EQ(rademacher_estimate_generic(fixed_class({{0, 0, 0}}), 3, exact_conf(), 1), 0.0);
    EXPECT_DOUBLE_EQ(rademacher_estimate_generic(fixed_class({{0, 0}, {1, 1}}), 2, exact_conf(), 1), 1.0);
}

TEST(RademacherGeneric, Homogeneous) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> fs(3, std::vector<double>(6));
        for (auto& f : fs)
            for (double& v : f) v = rng.uniform(-1.0, 1.0);
        const double c = rng.uniform(0.0, 4.0);
        auto scaled = fs;
        for (auto& f : scaled)
            for (double& v : f) v *= c;
        for (const auto& conf : {exact_conf(), sampled_conf(50)}) {
            const double a = rademacher_estimate_generic(fixed_class(fs), 6, conf, 9);
            const double b = rademacher_estimate_generic(fixed_class(scaled), 6, conf, 9);
            EXPECT_NEAR(b, c * a, 1e-12);
        }
    }
}

TEST(RademacherGeneric, ExactMatchesFullEnumeration) {
    // Brute force over all 2^n vectors, not only sigma_1 = +1 representatives.
    Rng rng(7);
    const std::size_t n = 7;
    std::vector<std::vector<double>> fs(4, std::vector<double>(n));
    for (auto& f : fs)
        for (double& v : f) v = rng.uniform(-1.0, 0.0);
    const auto sup = fixed_class(fs);
    double total = 0.0;
    SignVector sigma(n);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        for (std::size_t i = 0; i < n; ++i) sigma[i] = (mask >> i) & 1u ? -1 : 1;
        total += 2.0 / n * sup(sigma);
    }
    EXPECT_NEAR(rademacher_estimate_generic(sup, n, exact_conf(), 0), total / (1u << n), 1e-12);
}

TEST(RademacherGeneric, SampledConvergesToExact) {
    Rng rng(8);
    for (std::size_t n = 1; n <= 10; ++n) {
        std::vector<std::vector<double>> fs(3, std::vector<double>(n));
        for (auto& f : fs)
            for (double& v : f) v = rng.uniform(-1.0, 0.0);
        const double exact = rademacher_estimate_generic(fixed_class(fs), n, exact_conf(), 0);
        const double sampled = rademacher_estimate_generic(fixed_class(fs), n, sampled_conf(10000), 77);
        EXPECT_NEAR(sampled, exact, 0.05) << "n=" << n;
    }
}

TEST(RademacherGeneric, CapacityAndDeterminism) {
    EXPECT_THROW(rademacher_estimate_generic(fixed_class({std::vector<double>(21)}), 21, exact_conf(), 0),
                 CapacityError);
    const auto f = fixed_class({{-0.5, -0.1, -0.9, 0.0, -0.3}});
    EXPECT_EQ(rademacher_estimate_generic(f, 5, sampled_conf(100), 4),
              rademacher_estimate_generic(f, 5, sampled_conf(100), 4));
}

TEST(RademacherGeneric, EachDistinctVectorEvaluatedOnce) {
    int calls = 0;
    auto counting = [&](const SignVector&) {
        ++calls;
        return 1.0;
    };
    rademacher_estimate_generic(counting, 3, sampled_conf(500), 1);
    EXPECT_LE(calls, 4);
    calls = 0;
    rademacher_estimate_generic(counting, 5, exact_conf(), 1);
    EXPECT_EQ(calls, 16);
}

TEST(SignFingerprint, InvariantUnderGlobalFlip) {
    EXPECT_EQ(sign_fingerprint({1, -1, -1}), sign_fingerprint({-1, 1, 1}));
    EXPECT_NE(sign_fingerprint({1, -1, -1}), sign_fingerprint({1, 1, -1}));
    EXPECT_NE(sign_fingerprint({1, 1}), sign_fingerprint({1, 1, 1}));
}

TEST(OmegaPenalty, Examples) {
    const double expected = 0.3 + std::sqrt(8.0 * std::log(20.0) / 100.0) + std::sqrt(8.0 * std::log(10.0) / 100.0);
    EXPECT_NEAR(omega_penalty(0.3, 100, 0.05), expected, 1e-14);
    // High-precision value of the two square-root terms.
    EXPECT_NEAR(omega_penalty(0.0, 100, 0.05), 0.9187425714, 1e-9);
    EXPECT_LT(omega_penalty(0.0, 100000000000ULL, 0.05), 1e-4);
    EXPECT_GE(omega_penalty(0.3, 7, 0.2), 0.3);
    EXPECT_THROW(omega_penalty(0.1, 10, 0.5), DomainError);
    EXPECT_THROW(omega_penalty(-0.1, 10, 0.05), DomainError);
}

TEST(OmegaPenalty, MonotoneInArguments) {
    for (std::size_t n = 1; n < 200; ++n) {
        EXPECT_GE(omega_penalty(0.2, n, 0.05), omega_penalty(0.2, n + 1, 0.05));
        EXPECT_LE(omega_penalty(0.1, n, 0.05), omega_penalty(0.2, n, 0.05));
    }
}

TEST(MfmcPacBound, WorkedExample) {
    MfmcResult r;
    r.v_mfmc = 1.9;
    r.discrepancy_d = 1.8;
    EXPECT_NEAR(mfmc_pac_lower_bound(r, {0.0, 4.0}, 1, std::exp(-2.0)), -3.9, 1e-12);
    const double base = mfmc_pac_lower_bound(r, {0.0, 4.0}, 3, 0.1);
    r.discrepancy_d += 0.75;
    EXPECT_NEAR(mfmc_pac_lower_bound(r, {0.0, 4.0}, 3, 0.1), base - 0.75, 1e-12);
    r.discrepancy_d = 0.0;
    EXPECT_NEAR(mfmc_pac_lower_bound(r, {0.0, 4.0}, 3, 1.0 - 1e-15), 1.9, 1e-6);
}

TEST(RademacherRl, DirectExample) {
    ToyFixture f;
    ASSERT_EQ(f.ctx.n_tilde(), 2u);
    SupCallback sup = [](const PolicyClass&, const SignVector& sigma, const ReturnsFn&) {
        return std::max(std::abs(signed_sum(sigma, {0.0, 0.0})), std::abs(signed_sum(sigma, {-1.0, -1.0})));
    };
    EXPECT_DOUBLE_EQ(rademacher_estimate_rl(f.structure[1], f.ctx, exact_conf(), sup, 0), 1.0);
}

TEST(RademacherRl, ZeroClassWithZeroReturnsIsZero) {
    // With the zero policy every toy state stays at 0 where the reward is 0,
    // so every stitched return is the top of the range.
    ToyParams p;
    p.noise = false;
    const DomainSpec d = make_toy1d(p);
    std::vector<Transition> ts;
    for (std::size_t i = 0; i < 20; ++i) ts.push_back({{0.0}, {0.0}, {0.0}, 0.0, i / 10, i % 10});
    const TransitionDataset data(ts, 2, 10);
    EvaluationContext ctx(d, data);
    ToyFixture f;
    const auto sup = finite_class_sup({zero_params(f.structure[0])});
    EXPECT_DOUBLE_EQ(rademacher_estimate_rl(f.structure[0], ctx, exact_conf(), sup, 0), 0.0);
}

TEST(RademacherRl, SurrogateClampsAtZero) {
    ToyFixture f;
    ConfidenceParams conf = exact_conf();
    conf.estimator = RademacherEstimator::surrogate;
    SupCallback zero = [](const PolicyClass&, const SignVector&, const ReturnsFn&) { return 0.0; };
    EXPECT_DOUBLE_EQ(rademacher_estimate_rl(f.structure[1], f.ctx, conf, zero, 0), 0.0);
    // E|s1 + s2| = 1 for two signs, so a sup of 3 gives 2/2 * 1 * 3 - 2 = 1.
    SupCallback three = [](const PolicyClass&, const SignVector&, const ReturnsFn&) { return 3.0; };
    EXPECT_DOUBLE_EQ(rademacher_estimate_rl(f.structure[1], f.ctx, conf, three, 0), 1.0);
}

TEST(LowerBound, ReportIdentityAndInvariants) {
    ToyFixture f;
    const auto members = std::vector<PolicyParams>{filled(0.0), filled(0.2), filled(-0.4)};
    for (const auto& p : members) {
        for (auto est : {RademacherEstimator::direct, RademacherEstimator::surrogate}) {
            ConfidenceParams conf = exact_conf();
            conf.estimator = est;
            const BoundReport r = lower_bound_return(p, f.structure[1], f.ctx, conf, finite_class_sup(members), 3);
            EXPECT_NEAR(r.lower_bound, r.v_mfmc - r.discrepancy_d - 2 * r.hoeffding_term - r.omega, 1e-9);
            EXPECT_GE(r.omega, 0.0);
            EXPECT_GE(r.hoeffding_term, 0.0);
            EXPECT_LE(r.lower_bound, r.v_mfmc);
            EXPECT_EQ(r.confidence_multiplier, 4);
            EXPECT_EQ(r.class_index, 2u);
            EXPECT_EQ(r.hoeffding_n, 2u);
            EXPECT_NEAR(r.rademacher_estimate, 50.0 * r.rademacher_normalized, 1e-12);
        }
    }
}

TEST(LowerBound, ZeroClassReducesToHoeffdingAndRootTerms) {
    ToyFixture f;
    const PolicyParams zero = zero_params(f.structure[0]);
    SupCallback none = [](const PolicyClass&, const SignVector&, const ReturnsFn&) { return 0.0; };
    const BoundReport r = lower_bound_return(zero, f.structure[0], f.ctx, exact_conf(), none, 0);
    const double roots = 50.0 * omega_penalty(0.0, 2, 0.05);
    EXPECT_NEAR(r.lower_bound, r.v_mfmc - r.discrepancy_d - 2 * r.hoeffding_term - roots, 1e-9);
}

TEST(LowerBound, SupersetNeverRaisesBound) {
    ToyFixture f;
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<PolicyParams> members{filled(rng.uniform(-0.5, 0.5))};
        const BoundReport small =
            lower_bound_return(members[0], f.structure[1], f.ctx, exact_conf(), finite_class_sup(members), 0);
        members.push_back(filled(rng.uniform(-0.5, 0.5)));
        const BoundReport big =
            lower_bound_return(members[0], f.structure[1], f.ctx, exact_conf(), finite_class_sup(members), 0);
        EXPECT_GE(big.rademacher_estimate, small.rademacher_estimate);
        EXPECT_LE(big.lower_bound, small.lower_bound);
    }
}

TEST(LowerBound, RejectsPolicyOutsideClass) {
    ToyFixture f;
    EXPECT_THROW(lower_bound_return(filled(0.3), f.structure[0], f.ctx, exact_conf(), finite_class_sup({}), 0),
                 DomainError);
}

TEST(ConfidenceParams, Validation) {
    ConfidenceParams c;
    c.delta = 0.0;
    EXPECT_THROW(c.validate(), DomainError);
    c.delta = 0.05;
    c.sigma_draws = 0;
    EXPECT_THROW(c.validate(), DomainError);
    c.sigma_draws = 1;
    EXPECT_NO_THROW(c.validate());
    EXPECT_TRUE(c.exact_for(12));
    EXPECT_FALSE(c.exact_for(13));
}
