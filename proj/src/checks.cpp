#include "sepgl/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sepgl/penalties.hpp"
#include "sepgl/simgen.hpp"
#include "sepgl/solver.hpp"
#include "sepgl/tightness.hpp"

namespace sepgl {

namespace {

Index uniform_index(Index lo, Index hi, CounterRng& rng)
{
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

} // namespace

Eigen::VectorXd random_beta(const InducedPartition& part, int kind, CounterRng& rng)
{
    std::normal_distribution<double> normal;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(part.p);
    switch (kind % 3) {
    case 0:
        for (Index j = 0; j < part.p; ++j) {
            beta[j] = normal(rng);
        }
        break;
    case 1: {
        std::bernoulli_distribution keep(0.3);
        for (Index j = 0; j < part.p; ++j) {
            beta[j] = keep(rng) ? normal(rng) : 0.0;
        }
        break;
    }
    default: {
        const Index k = uniform_index(0, part.num_parts() - 1, rng);
        for (Index j : part.parts[static_cast<std::size_t>(k)]) {
            beta[j] = normal(rng);
        }
        break;
    }
    }
    return beta;
}

CheckReport check_sandwich(int trials, std::uint64_t seed)
{
    CheckReport report{"sandwich"};
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        const GroupStructure gs = random_structure(uniform_index(1, 30, rng), uniform_index(1, 8, rng), rng);
        const InducedPartition part = induce_partition(gs);
        const Eigen::VectorXd beta = random_beta(part, t, rng);
        const SandwichResult s = sandwich_check(gs, part, beta);
        ++report.trials;
        report.failures += s.ok ? 0 : 1;
        report.worst = std::max(report.worst, s.violation);
    }
    return report;
}

CheckReport check_dual(int trials, std::uint64_t seed)
{
    CheckReport report{"dual"};
    std::normal_distribution<double> normal;
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        const GroupStructure gs = random_structure(uniform_index(1, 12, rng), uniform_index(1, 5, rng), rng);
        Eigen::VectorXd v(gs.p());
        for (Index j = 0; j < v.size(); ++j) {
            v[j] = normal(rng);
        }
        const double bound = dual_upper_bound(v, gs);
        const double estimate = dual_estimate(v, PenaltySpec::overlapping(gs));
        const double excess = estimate - bound;
        ++report.trials;
        report.failures += excess <= 1e-8 ? 0 : 1;
        report.worst = std::max(report.worst, excess);
    }
    return report;
}

CheckReport check_kkt(int trials, std::uint64_t seed, double tol)
{
    CheckReport report{"kkt"};
    std::normal_distribution<double> normal;
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        const GroupStructure gs = random_structure(uniform_index(2, 12, rng), uniform_index(1, 4, rng), rng);
        const Index n = 40;
        Problem problem;
        problem.X.resize(n, gs.p());
        for (Index j = 0; j < gs.p(); ++j) {
            for (Index i = 0; i < n; ++i) {
                problem.X(i, j) = normal(rng);
            }
        }
        Eigen::VectorXd beta(gs.p());
        for (Index j = 0; j < gs.p(); ++j) {
            beta[j] = normal(rng);
        }
        problem.y = problem.X * beta;
        for (Index i = 0; i < n; ++i) {
            problem.y[i] += normal(rng);
        }
        const Eigen::VectorXd score = problem.X.transpose() * problem.y / static_cast<double>(n);
        for (const PenaltySpec& pen : {PenaltySpec::separable(induce_partition(gs)), PenaltySpec::weighted_lasso(gs)}) {
            SolveConfig cfg;
            cfg.lambda = 0.3 * dual_norm_or_bound(score, pen);
            cfg.tol = 1e-15;
            cfg.max_iter = 200000;
            const Solution sol = fit(problem, pen, cfg);
            const double gap = kkt_gap(problem, sol.beta, pen, cfg.lambda) / (1.0 + cfg.lambda);
            ++report.trials;
            report.failures += gap <= tol ? 0 : 1;
            report.worst = std::max(report.worst, gap);
        }
    }
    return report;
}

CheckReport check_theorem1(int trials, std::uint64_t seed)
{
    CheckReport report{"theorem1-search"};
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        const GroupStructure gs = random_structure(uniform_index(2, 4, rng), uniform_index(2, 3, rng), rng);
        TightnessOptions options;
        options.seed = seed + static_cast<std::uint64_t>(t);
        const TightnessReport r = tightness_search(gs, options);
        ++report.trials;
        report.extra += static_cast<int>(r.counterexamples.size());
        report.failures += r.counterexamples.empty() ? 0 : 1;
    }
    return report;
}

} // namespace sepgl
