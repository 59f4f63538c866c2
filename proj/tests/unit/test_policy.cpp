#include <srm/domains.hpp>
#include <srm/mfmc.hpp>
#include <srm/policy.hpp>
#include <srm/rng.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace srm;

namespace {

ClassGeometry one_center(double center = 0.0, double action_half = 10.0) {
    return ClassGeometry{{{center}}, {1.0}, Box{{-action_half}, {action_half}}, 1, 1};
}

PolicyParams scalar(double v) {
    PolicyParams p(1, 1);
    p(0, 0) = v;
    return p;
}

StructureSpec toy_spec() {
    const DomainSpec d = make_toy1d();
    StructureSpec s;
    s.centers = grid_centers(d.state_bounds, {4});
    s.state_scale = range_weights(d).state_scale;
    s.action_bounds = d.action_bounds;
    s.limits = {0.0, 0.125, 0.25, 0.375, 0.5};
    return s;
}

} // namespace

TEST(RbfPolicy, Examples) {
    RbfPolicyClass cls{one_center(), 1.0, 10.0};
    EXPECT_DOUBLE_EQ(eval_rbf_policy(scalar(0.0), cls, {0.7})[0], 0.0);
    EXPECT_DOUBLE_EQ(eval_rbf_policy(scalar(1.0), cls, {0.0})[0], 1.0);
    cls.width = 0.5;
    EXPECT_NEAR(eval_rbf_policy(scalar(1.0), cls, {2.0})[0], std::exp(-2.0), 1e-15);
    EXPECT_NEAR(std::exp(-2.0), 0.1353, 1e-4);
}

TEST(RbfPolicy, DimensionMismatchThrows) {
    RbfPolicyClass cls{one_center(), 1.0, 10.0};
    EXPECT_THROW(eval_rbf_policy(PolicyParams(2, 1), cls, {0.0}), StructuralError);
    EXPECT_THROW(eval_rbf_policy(scalar(1.0), cls, {0.0, 1.0}), StructuralError);
}

TEST(InvDistPolicy, Examples) {
    InvDistPolicyClass cls{one_center(), 1e-3, ParamScheme::magnitude, 10.0, 1};
    EXPECT_DOUBLE_EQ(eval_invdist_policy(scalar(0.0), cls, {0.3})[0], 0.0);
    EXPECT_DOUBLE_EQ(eval_invdist_policy(scalar(1.0), cls, {2.0})[0], 0.5);
    // At the anchor the floored distance gives 1/epsilon = 1000, clipped to the toy bound.
    InvDistPolicyClass toy{one_center(0.0, 0.5), 1e-3, ParamScheme::magnitude, 10.0, 1};
    EXPECT_DOUBLE_EQ(eval_invdist_policy(scalar(1.0), toy, {0.0})[0], 0.5);
    EXPECT_DOUBLE_EQ(eval_invdist_policy(scalar(-1.0), toy, {0.0})[0], -0.5);
}

TEST(Projection, Examples) {
    RbfPolicyClass cls{ClassGeometry{{{0.0}, {1.0}}, {1.0}, Box{{-1}, {1}}, 1, 1}, 1.0, 0.5};
    PolicyParams p(2, 1);
    p(0, 0) = 0.7;
    p(1, 0) = -0.2;
    const PolicyParams q = project_to_class(p, cls);
    EXPECT_DOUBLE_EQ(q(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(q(1, 0), -0.2);
    EXPECT_EQ(project_to_class(q, cls), q);

    InvDistPolicyClass tied{ClassGeometry{{{0.0}, {1.0}}, {1.0}, Box{{-5}, {5}}, 1, 1}, 1e-3, ParamScheme::tying,
                            5.0, 1};
    PolicyParams t(2, 1);
    t(0, 0) = 1.0;
    t(1, 0) = 3.0;
    const PolicyParams tp = project_to_class(t, tied);
    EXPECT_DOUBLE_EQ(tp(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(tp(1, 0), 2.0);
}

TEST(Projection, IdempotentAndNonExpanding) {
    const PolicyStructure st = build_structure(toy_spec());
    Rng rng(8);
    for (const auto& cls : st.classes)
        for (int i = 0; i < 200; ++i) {
            PolicyParams p(4, 1);
            for (double& v : p.values) v = rng.uniform(-1.0, 1.0);
            const PolicyParams q = project_to_class(p, cls);
            EXPECT_TRUE(is_feasible(q, cls));
            EXPECT_EQ(project_to_class(q, cls), q);
            for (std::size_t k = 0; k < p.values.size(); ++k) EXPECT_LE(std::abs(q.values[k]), std::abs(p.values[k]));
        }
}

TEST(Projection, TyingIdempotentOnRandomInputs) {
    ClassGeometry g{{{0.0}, {0.3}, {0.6}, {0.9}}, {1.0}, Box{{-1, -1}, {1, 1}}, 2, 1};
    Rng rng(12);
    for (std::size_t untied = 1; untied <= 4; ++untied) {
        PolicyClass cls = InvDistPolicyClass{g, 1e-3, ParamScheme::tying, 0.8, untied};
        for (int i = 0; i < 100; ++i) {
            PolicyParams p(4, 2);
            for (double& v : p.values) v = rng.uniform(-2.0, 2.0);
            const PolicyParams q = project_to_class(p, cls);
            ASSERT_TRUE(is_feasible(q, cls));
            EXPECT_EQ(project_to_class(q, cls), q);
        }
    }
}

TEST(PolicyLipschitz, Examples) {
    RbfPolicyClass cls{one_center(), 0.5, 1.0};
    EXPECT_DOUBLE_EQ(policy_lipschitz(PolicyParams(1, 1), cls), 0.0);
    EXPECT_NEAR(policy_lipschitz(scalar(1.0), cls), std::exp(-0.5), 1e-15);
    // Grid search of |d/ds e^{-0.5 s^2}| = |s| e^{-0.5 s^2}.
    double best = 0.0;
    for (int i = 0; i <= 400000; ++i) {
        const double s = 4.0 * i / 400000.0;
        best = std::max(best, s * std::exp(-0.5 * s * s));
    }
    EXPECT_NEAR(policy_lipschitz(scalar(1.0), cls), best, 1e-9);
    EXPECT_NEAR(best, 0.6065, 1e-4);
}

TEST(PolicyLipschitz, DominatesDifferenceQuotients) {
    Rng rng(21);
    ClassGeometry g{{{-0.5, 0.2}, {0.1, -0.4}, {0.6, 0.6}}, {0.7, 1.3}, Box{{-3, -3}, {3, 3}}, 2, 1};
    const PolicyClass rbf = RbfPolicyClass{g, 2.0, 1.0};
    const PolicyClass inv = InvDistPolicyClass{g, 0.05, ParamScheme::magnitude, 1.0, 1};
    for (const PolicyClass& cls : {rbf, inv}) {
        for (int trial = 0; trial < 10; ++trial) {
            PolicyParams p(3, 2);
            for (double& v : p.values) v = rng.uniform(-1.0, 1.0);
            const double L = policy_lipschitz(p, cls);
            for (int i = 0; i < 100; ++i) {
                StateVector s{rng.uniform(-1, 1), rng.uniform(-1, 1)}, s2 = s;
                if (i % 2) s2 = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
                else s2 = {s[0] + rng.uniform(-1e-3, 1e-3), s[1] + rng.uniform(-1e-3, 1e-3)};
                const auto a = evaluate_policy(p, cls, s), b = evaluate_policy(p, cls, s2);
                const double da = std::hypot(a[0] - b[0], a[1] - b[1]);
                const double ds = std::hypot(0.7 * (s[0] - s2[0]), 1.3 * (s[1] - s2[1]));
                EXPECT_LE(da, L * ds + 1e-9);
            }
        }
    }
}

TEST(PolicyOutput, InsideActionBounds) {
    const PolicyStructure st = build_structure(toy_spec());
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        PolicyParams p(4, 1);
        for (double& v : p.values) v = rng.uniform(-0.5, 0.5);
        const auto a = evaluate_policy(p, st.largest(), {rng.uniform(-1, 1)});
        ASSERT_GE(a[0], -0.5);
        ASSERT_LE(a[0], 0.5);
    }
}

TEST(Structure, ToyHasFiveNestedClasses) {
    const PolicyStructure st = build_structure(toy_spec());
    ASSERT_EQ(st.size(), 5u);
    for (std::size_t k = 0; k < st.size(); ++k) {
        EXPECT_EQ(geometry(st[k]).index, k + 1);
        EXPECT_EQ(basis_count(st[k]), 4u);
    }
    EXPECT_DOUBLE_EQ(magnitude_limit(st[4]), 0.5);
    // Centers evenly spaced over [-1, 1], adjacent bumps overlap at half height.
    const auto& rbf = std::get<RbfPolicyClass>(st[0]);
    EXPECT_DOUBLE_EQ(rbf.geometry.centers[0][0], -1.0);
    EXPECT_DOUBLE_EQ(rbf.geometry.centers[3][0], 1.0);
    const double h = rbf.geometry.state_scale[0] * (rbf.geometry.centers[1][0] - rbf.geometry.centers[0][0]);
    EXPECT_NEAR(std::exp(-rbf.width * h * h), 0.5, 1e-12);
}

TEST(Structure, PendulumHasTwoClasses) {
    const DomainSpec d = make_pendulum();
    StructureSpec s;
    s.centers = grid_centers(d.state_bounds, {4, 4});
    s.state_scale = range_weights(d).state_scale;
    s.action_bounds = d.action_bounds;
    s.limits = {0.0, 50.0};
    const PolicyStructure st = build_structure(s);
    EXPECT_EQ(st.size(), 2u);
    EXPECT_EQ(basis_count(st[1]), 16u);
}

TEST(Structure, RejectsNonMonotoneLimits) {
    StructureSpec s = toy_spec();
    s.limits = {0.5, 0.25};
    EXPECT_THROW(build_structure(s), DomainError);
    s.limits = {0.25, 0.25};
    EXPECT_THROW(build_structure(s), DomainError);
}

TEST(Structure, NestedForRandomDraws) {
    StructureSpec s = toy_spec();
    s.representation = Representation::invdist;
    const PolicyStructure st = build_structure(s);
    Rng rng(99);
    for (std::size_t k = 0; k + 1 < st.size(); ++k)
        for (int i = 0; i < 100; ++i) EXPECT_TRUE(is_feasible(detail::sample_feasible(st[k], rng), st[k + 1]));

    StructureSpec t = toy_spec();
    t.representation = Representation::invdist;
    t.scheme = ParamScheme::tying;
    t.untied = {1, 2, 4};
    const PolicyStructure tied = build_structure(t);
    ASSERT_EQ(tied.size(), 3u);
    for (std::size_t k = 0; k + 1 < tied.size(); ++k)
        for (int i = 0; i < 100; ++i) EXPECT_TRUE(is_feasible(detail::sample_feasible(tied[k], rng), tied[k + 1]));
    EXPECT_EQ(free_dimension(tied[0]), 1u);
    EXPECT_EQ(free_dimension(tied[2]), 4u);
}

TEST(Structure, ZeroLimitClassIsSingleton) {
    const PolicyStructure st = build_structure(toy_spec());
    EXPECT_EQ(free_dimension(st[0]), 0u);
    EXPECT_TRUE(is_feasible(zero_params(st[0]), st[0]));
    PolicyParams one(4, 1);
    one(2, 0) = 1e-9;
    EXPECT_FALSE(is_feasible(one, st[0]));
    PolicyParams p(4, 1, 0.3);
    EXPECT_EQ(project_to_class(p, st[0]), zero_params(st[0]));
}

TEST(FreeParameters, ExpandContractRoundTrip) {
    ClassGeometry g{{{0.0}, {0.3}, {0.6}, {0.9}}, {1.0}, Box{{-1, -1}, {1, 1}}, 2, 1};
    const PolicyClass cls = InvDistPolicyClass{g, 1e-3, ParamScheme::tying, 0.8, 3};
    ASSERT_EQ(free_dimension(cls), 6u);
    const std::vector<double> z{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const PolicyParams p = expand_params(cls, z);
    EXPECT_TRUE(is_feasible(p, cls));
    EXPECT_EQ(contract_params(cls, p), z);
    EXPECT_DOUBLE_EQ(p(3, 1), 0.6);
}
