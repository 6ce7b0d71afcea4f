#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "sepgl/error.hpp"
#include "sepgl/path.hpp"
#include "sepgl/simgen.hpp"
#include "test_util.hpp"

using namespace sepgl;

namespace {

Problem lasso_instance(std::uint64_t seed, Index n = 60, Index p = 8)
{
    CounterRng rng(seed);
    Problem pr;
    pr.X = test::normal_matrix(n, p, rng);
    pr.y = pr.X * test::normal_vector(p, rng) + test::normal_vector(n, rng);
    return pr;
}

Problem orthogonal_instance(std::uint64_t seed, Index n = 40, Index p = 6)
{
    CounterRng rng(seed);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(test::normal_matrix(n, p, rng));
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    Problem pr;
    pr.X = std::sqrt(static_cast<double>(n)) * Q;
    pr.y = pr.X * test::normal_vector(p, rng) + test::normal_vector(n, rng);
    return pr;
}

int expect_code(ErrorCode code, const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
        return 1;
    }
    ADD_FAILURE() << "no error thrown";
    return 0;
}

} // namespace

TEST(LogGrid, Examples)
{
    const auto g = log_grid(1.0, 100.0, 3);
    ASSERT_EQ(g.size(), 3U);
    EXPECT_DOUBLE_EQ(g[0], 100.0);
    EXPECT_NEAR(g[1], 10.0, 1e-12);
    EXPECT_DOUBLE_EQ(g[2], 1.0);
    EXPECT_EQ(log_grid(2.5, 2.5, 50), std::vector<double>{2.5});
}

TEST(LogGrid, EqualRatios)
{
    const auto g = log_grid(1e-6, 3e3, 50);
    ASSERT_EQ(g.size(), 50U);
    const double r0 = g[1] / g[0];
    for (std::size_t k = 1; k < g.size(); ++k) {
        EXPECT_LT(g[k], g[k - 1]);
        EXPECT_LE(std::abs(g[k] / g[k - 1] - r0), 1e-12 * std::abs(r0));
    }
}

TEST(LogGrid, InvalidRange)
{
    expect_code(ErrorCode::InvalidRange, [] { log_grid(2.0, 1.0); });
    expect_code(ErrorCode::InvalidRange, [] { log_grid(0.0, 1.0); });
}

TEST(LambdaMax, ZeroResponseExhausts)
{
    Problem pr = lasso_instance(1);
    pr.y.setZero();
    expect_code(ErrorCode::SearchExhausted,
                [&] { find_lambda_max(pr, PenaltySpec::weighted_lasso(Eigen::VectorXd::Ones(8))); });
}

TEST(LambdaMax, LassoBracketsAnalyticThreshold)
{
    for (std::uint64_t t = 0; t < 10; ++t) {
        const Problem pr = lasso_instance(100 + t);
        CounterRng rng(200, t);
        const Eigen::VectorXd c = test::normal_vector(8, rng).cwiseAbs().array() + 0.5;
        const double lam = find_lambda_max(pr, PenaltySpec::weighted_lasso(c));
        const double threshold = (pr.X.transpose() * pr.y / 60.0).cwiseAbs().cwiseQuotient(c).maxCoeff();
        EXPECT_GT(threshold, 0.9 * lam);
        EXPECT_LE(threshold, lam);
    }
}

TEST(LambdaMax, ScalesWithResponse)
{
    Problem pr = lasso_instance(3);
    const auto pen = PenaltySpec::weighted_lasso(Eigen::VectorXd::Ones(8));
    const double a = find_lambda_max(pr, pen);
    pr.y *= 10.0;
    const double b = find_lambda_max(pr, pen);
    EXPECT_GE(b / a, 9.0 - 1e-9);
    EXPECT_LE(b / a, 10.0 / 0.9 + 1e-9);
}

TEST(LambdaMax, AllZeroAtEndpointForEveryPenalty)
{
    const auto gs = interlocking_groups(3, 4, 0.25);
    const Problem pr = lasso_instance(4, 60, gs.p());
    for (const PenaltySpec& pen : {PenaltySpec::overlapping(gs), PenaltySpec::separable(induce_partition(gs)),
                                   PenaltySpec::weighted_lasso(gs)}) {
        const double lam = find_lambda_max(pr, pen);
        SolveConfig cfg;
        cfg.lambda = lam;
        EXPECT_EQ(fit(pr, pen, cfg).support_size(), 0);
        cfg.lambda = 0.9 * lam;
        EXPECT_GT(fit(pr, pen, cfg).support_size(), 0);
    }
}

TEST(LambdaMin, WellConditionedLassoIsBelowMax)
{
    const Problem pr = lasso_instance(5);
    const auto pen = PenaltySpec::weighted_lasso(Eigen::VectorXd::Ones(8));
    const double lo = find_lambda_min(pr, pen);
    const double hi = find_lambda_max(pr, pen);
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(lo, hi);
    SolveConfig cfg;
    cfg.lambda = lo;
    cfg.tol = 1e-4;
    EXPECT_EQ(fit(pr, pen, cfg).support_size(), 8);
}

TEST(LambdaMin, OrthogonalNullColumnHasNoFullSupport)
{
    CounterRng rng(6);
    const Index n = 30, p = 5;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(test::normal_matrix(n, p + 1, rng));
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p + 1);
    Problem pr;
    pr.X = Q.leftCols(p);
    // Response in the span of the first p - 1 columns plus a direction orthogonal to all of X.
    pr.y = Q.leftCols(p - 1) * test::normal_vector(p - 1, rng) + Q.col(p);
    expect_code(ErrorCode::NoFullSupport,
                [&] { find_lambda_min(pr, PenaltySpec::weighted_lasso(Eigen::VectorXd::Ones(p))); });

    const PathResult path = regularization_path(pr, PenaltySpec::weighted_lasso(Eigen::VectorXd::Ones(p)), {}, 5);
    EXPECT_TRUE(path.lambda_min_floored);
    EXPECT_DOUBLE_EQ(path.lambda_min, 1e-8);
}

TEST(SolvePath, SingleGridPointEqualsFit)
{
    const Problem pr = lasso_instance(7);
    const auto pen = PenaltySpec::weighted_lasso(Eigen::VectorXd::Ones(8));
    SolveConfig cfg;
    cfg.lambda = 0.2;
    const PathResult path = solve_path(pr, pen, {0.2}, cfg);
    ASSERT_EQ(path.solutions.size(), 1U);
    EXPECT_EQ(path.solutions[0].beta, fit(pr, pen, cfg).beta);
}

TEST(SolvePath, WarmStartsMatchColdStarts)
{
    const auto gs = interlocking_groups(3, 5, 0.2);
    const Problem pr = lasso_instance(8, 50, gs.p());
    for (const PenaltySpec& pen : {PenaltySpec::overlapping(gs), PenaltySpec::separable(induce_partition(gs))}) {
        SolveConfig cfg;
        cfg.tol = 1e-8;
        const auto grid = log_grid(1e-3, 1.0, 8);
        const PathResult path = solve_path(pr, pen, grid, cfg);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            SolveConfig cold = cfg;
            cold.lambda = grid[k];
            EXPECT_LE(path.solutions[k].objective, fit(pr, pen, cold).objective + 2 * cfg.tol);
        }
    }
}

TEST(SolvePath, OrthogonalLassoSupportGrowsAlongPath)
{
    for (std::uint64_t t = 0; t < 5; ++t) {
        const Problem pr = orthogonal_instance(300 + t);
        const PathResult path =
            regularization_path(pr, PenaltySpec::weighted_lasso(Eigen::VectorXd::Ones(6)), {}, 30);
        ASSERT_EQ(path.lambdas.size(), 30U);
        EXPECT_EQ(path.support_sizes.front(), 0);
        for (std::size_t k = 1; k < path.support_sizes.size(); ++k) {
            EXPECT_LT(path.lambdas[k], path.lambdas[k - 1]);
            EXPECT_GE(path.support_sizes[k], path.support_sizes[k - 1]);
        }
        EXPECT_EQ(path.support_sizes.back(), 6);
        EXPECT_GE(path.total_time, 0.0);
    }
}

TEST(SolvePath, Reproducible)
{
    const auto gs = interlocking_groups(3, 5, 0.2);
    const Problem pr = lasso_instance(9, 50, gs.p());
    const auto pen = PenaltySpec::overlapping(gs);
    const PathResult a = regularization_path(pr, pen, {}, 10);
    const PathResult b = regularization_path(pr, pen, {}, 10);
    EXPECT_EQ(a.lambdas, b.lambdas);
    for (std::size_t k = 0; k < a.solutions.size(); ++k) {
        EXPECT_EQ(a.solutions[k].beta, b.solutions[k].beta);
    }
}

TEST(BestMetrics, PlantedTruthAndZeroPath)
{
    const Problem pr = lasso_instance(10);
    const auto pen = PenaltySpec::weighted_lasso(Eigen::VectorXd::Ones(8));
    const PathResult path = solve_path(pr, pen, {0.5, 0.1, 0.01}, {});
    const BestMetrics planted = best_metrics(path, path.solutions[1].beta);
    EXPECT_EQ(planted.rel_error, 0.0);
    EXPECT_EQ(planted.rel_error_at, 1U);

    PathResult zeros;
    zeros.lambdas = {2.0, 1.0};
    zeros.solutions.resize(2);
    zeros.solutions[0].beta = Eigen::VectorXd::Zero(8);
    zeros.solutions[1].beta = Eigen::VectorXd::Zero(8);
    Eigen::VectorXd star = Eigen::VectorXd::Zero(8);
    star[1] = 3.0;
    star[6] = -1.0;
    star[7] = 0.5;
    const BestMetrics m = best_metrics(zeros, star);
    EXPECT_DOUBLE_EQ(m.rel_error, 1.0);
    EXPECT_DOUBLE_EQ(m.support_discrepancy, 3.0 / 8.0);
    expect_code(ErrorCode::ZeroTruth, [&] { best_metrics(zeros, Eigen::VectorXd::Zero(8)); });
}
