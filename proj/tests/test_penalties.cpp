#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "sepgl/checks.hpp"
#include "sepgl/penalties.hpp"
#include "sepgl/simgen.hpp"
#include "test_util.hpp"

using namespace sepgl;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs)
{
    Eigen::VectorXd v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) {
        v[i++] = x;
    }
    return v;
}

} // namespace

TEST(Phi, ThreeDValues)
{
    const auto gs = test::three_d();
    EXPECT_DOUBLE_EQ(phi(vec({3, 4, 0}), gs), 10.0);
    EXPECT_DOUBLE_EQ(phi(vec({0, 0, 0}), gs), 0.0);
    EXPECT_NEAR(phi(vec({3, 4, 2}), gs), 10.385164807134505, 1e-12);
    EXPECT_THROW(phi(vec({1, 2}), gs), Error);
}

TEST(Psi, ThreeDValues)
{
    const auto part = induce_partition(test::three_d());
    EXPECT_DOUBLE_EQ(psi(vec({3, 4, 0}), part), 10.0);
    EXPECT_DOUBLE_EQ(psi(vec({0, 0, 2}), part), 2.0);
    EXPECT_DOUBLE_EQ(psi(vec({3, 4, 2}), part), 12.0);
}

TEST(WeightedLasso, ThreeDValues)
{
    const Eigen::VectorXd c = lasso_weights(test::three_d());
    EXPECT_EQ(c, vec({2, 2, 1}));
    EXPECT_DOUBLE_EQ(weighted_lasso(vec({3, 4, 2}), c), 16.0);
    EXPECT_DOUBLE_EQ(weighted_lasso(vec({0, 0, 0}), c), 0.0);
    EXPECT_THROW(weighted_lasso(vec({1, 2}), c), Error);
}

TEST(LqNorm, SpecialCases)
{
    const auto gs = test::three_d();
    const auto part = induce_partition(gs);
    const Eigen::VectorXd b = vec({3, 4, 2});
    EXPECT_NEAR(lq_norm(b, part.parts, part.weights, 1.0, 2.0), psi(b, part), 1e-12);
    EXPECT_NEAR(lq_norm(b, {{0}, {1}, {2}}, {2.0, 2.0, 1.0}, 1.0, 1.0), 16.0, 1e-12);
    EXPECT_DOUBLE_EQ(lq_norm(b, {{0, 1}, {2}}, {1.0, 1.0}, kInf, 2.0), 5.0);
}

TEST(LqNorm, RejectsBadExponents)
{
    const Eigen::VectorXd b = vec({1, 1});
    try {
        lq_norm(b, {{0, 1}}, {1.0}, 0.0, 2.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidExponent);
    }
    EXPECT_THROW(lq_norm(b, {{0, 1}}, {1.0}, 1.0, -1.0), Error);
}

TEST(DualUpperBound, Examples)
{
    EXPECT_NEAR(dual_upper_bound(vec({1, 1, 1}), test::three_d()), 1.224744871391589, 1e-12);
    const GroupStructure disjoint(4, {{0, 1}, {2, 3}}, {1.0, 1.0});
    EXPECT_DOUBLE_EQ(dual_upper_bound(vec({3, 4, 1, 1}), disjoint), 5.0);
}

TEST(DualEstimate, LassoClosedForm)
{
    CounterRng rng(5);
    for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXd v = test::normal_vector(7, rng);
        Eigen::VectorXd c = test::normal_vector(7, rng).cwiseAbs().array() + 0.5;
        const double exact = (v.cwiseAbs().array() / c.array()).maxCoeff();
        const double est = dual_estimate(v, PenaltySpec::weighted_lasso(c));
        EXPECT_LE(est, exact + 1e-10);
        EXPECT_NEAR(est, exact, 1e-6);
    }
}

TEST(DualEstimate, SeparableClosedForm)
{
    CounterRng rng(6);
    for (int t = 0; t < 20; ++t) {
        const auto gs = random_structure(10, 4, rng);
        const auto part = induce_partition(gs);
        const Eigen::VectorXd v = test::normal_vector(10, rng);
        double exact = 0.0;
        for (Index k = 0; k < part.num_parts(); ++k) {
            double s = 0.0;
            for (Index j : part.parts[static_cast<std::size_t>(k)]) {
                s += v[j] * v[j];
            }
            exact = std::max(exact, std::sqrt(s) / part.weights[static_cast<std::size_t>(k)]);
        }
        const double est = dual_estimate(v, PenaltySpec::separable(part));
        EXPECT_LE(est, exact + 1e-10);
        EXPECT_NEAR(est, exact, 1e-6);
    }
}

TEST(DualEstimate, SharpWhenMaximizerHasDegreeOne)
{
    // G0 holds only degree-one variables and carries the largest ratio.
    const GroupStructure sharp(6, {{0, 1}, {2, 3}, {3, 4, 5}}, {1.0, 2.0, 1.0});
    CounterRng rng(8);
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd v = test::normal_vector(6, rng, 0.1);
        v[0] = 3.0 + t;
        v[1] = -2.0;
        const double bound = dual_upper_bound(v, sharp);
        EXPECT_NEAR(bound, v.head(2).norm(), 1e-12);
        EXPECT_NEAR(dual_estimate(v, PenaltySpec::overlapping(sharp)), bound, 1e-6);
    }
}

TEST(DualEstimate, NeverAboveBound)
{
    for (std::uint64_t t = 0; t < 50; ++t) {
        CounterRng rng(77, t);
        const auto gs = random_structure(8, 4, rng);
        const Eigen::VectorXd v = test::normal_vector(8, rng);
        EXPECT_LE(dual_estimate(v, PenaltySpec::overlapping(gs)), dual_upper_bound(v, gs) + 1e-8);
    }
}

TEST(Sandwich, ExamplesAndSweep)
{
    const auto gs = test::three_d();
    const auto part = induce_partition(gs);
    const auto single = sandwich_check(gs, part, vec({3, -4, 0}));
    EXPECT_TRUE(single.single_part);
    EXPECT_TRUE(single.ok);
    EXPECT_DOUBLE_EQ(single.phi, single.psi);
    const auto zero = sandwich_check(gs, part, vec({0, 0, 0}));
    EXPECT_TRUE(zero.ok);
    EXPECT_EQ(zero.phi + zero.psi + zero.wlasso, 0.0);

    for (std::uint64_t t = 0; t < 1000; ++t) {
        CounterRng rng(31, t);
        const Index p = 1 + static_cast<Index>(rng() % 30);
        const auto g = random_structure(p, 1 + static_cast<Index>(rng() % 8), rng);
        const auto s = sandwich_check(g, induce_partition(g), test::normal_vector(p, rng));
        ASSERT_TRUE(s.ok) << "trial " << t << " violation " << s.violation;
    }
}

TEST(Sandwich, SinglePartEqualityEverywhere)
{
    for (std::uint64_t t = 0; t < 200; ++t) {
        CounterRng rng(32, t);
        const auto g = random_structure(20, 6, rng);
        const auto part = induce_partition(g);
        const Eigen::VectorXd b = random_beta(part, 2, rng);
        EXPECT_LE(std::abs(phi(b, g) - psi(b, part)), 1e-12 * (1.0 + psi(b, part)));
    }
}

TEST(NormAxioms, HomogeneityAndTriangle)
{
    for (std::uint64_t t = 0; t < 100; ++t) {
        CounterRng rng(40, t);
        const auto gs = random_structure(12, 4, rng);
        const auto part = induce_partition(gs);
        const Eigen::VectorXd c = lasso_weights(gs);
        const Eigen::VectorXd a = test::normal_vector(12, rng);
        const Eigen::VectorXd b = test::normal_vector(12, rng);
        const double alpha = -2.5;
        const std::vector<std::function<double(const Eigen::VectorXd&)>> norms = {
            [&](const Eigen::VectorXd& x) { return phi(x, gs); },
            [&](const Eigen::VectorXd& x) { return psi(x, part); },
            [&](const Eigen::VectorXd& x) { return weighted_lasso(x, c); },
            [&](const Eigen::VectorXd& x) { return lq_norm(x, gs.groups(), gs.weights(), 2.0, 1.0); },
            [&](const Eigen::VectorXd& x) { return lq_norm(x, gs.groups(), gs.weights(), kInf, 2.0); },
            [&](const Eigen::VectorXd& x) { return lq_norm(x, gs.groups(), gs.weights(), 1.0, kInf); },
        };
        for (const auto& n : norms) {
            EXPECT_NEAR(n(alpha * a), std::abs(alpha) * n(a), 1e-12 * (1.0 + n(a) * 3.0));
            EXPECT_LE(n(a + b), n(a) + n(b) + 1e-12 * (1.0 + n(a) + n(b)));
        }
    }
}

TEST(DisjointCollapse, PhiPsiLqAgree)
{
    for (std::uint64_t t = 0; t < 50; ++t) {
        CounterRng rng(41, t);
        std::vector<IndexSet> groups{{0, 1, 2}, {3}, {4, 5}};
        std::vector<double> w{1.0 + static_cast<double>(t % 3), 0.5, 2.0};
        const GroupStructure gs(6, groups, w);
        const auto part = induce_partition(gs);
        const Eigen::VectorXd b = test::normal_vector(6, rng);
        EXPECT_NEAR(phi(b, gs), psi(b, part), 1e-12);
        EXPECT_NEAR(phi(b, gs), lq_norm(b, groups, w, 1.0, 2.0), 1e-12);
    }
}

TEST(PenaltySpec, EvaluateDispatchesAndScales)
{
    const auto gs = test::three_d();
    const Eigen::VectorXd b = vec({3, 4, 2});
    EXPECT_NEAR(evaluate(PenaltySpec::overlapping(gs), b), 10.385164807134505, 1e-12);
    EXPECT_DOUBLE_EQ(evaluate(PenaltySpec::separable(induce_partition(gs)), b), 12.0);
    EXPECT_DOUBLE_EQ(evaluate(PenaltySpec::weighted_lasso(gs), b), 16.0);
    EXPECT_EQ(PenaltySpec::overlapping(gs).dimension(), 3);
}

TEST(ProjectOntoBall, FeasibleAndIdentityInside)
{
    const auto gs = test::three_d();
    const auto pen = PenaltySpec::overlapping(gs);
    const Eigen::VectorXd inside = vec({0.1, 0.0, 0.1});
    EXPECT_EQ(project_onto_ball(inside, pen, 1.0), inside);
    const Eigen::VectorXd u = project_onto_ball(vec({3, 4, 2}), pen, 1.0);
    EXPECT_LE(evaluate(pen, u), 1.0 + 1e-12);
    EXPECT_GT(evaluate(pen, u), 1.0 - 1e-6);
}
