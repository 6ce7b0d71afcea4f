#include "sepgl/path.hpp"

#include <chrono>
#include <cmath>

#include "sepgl/metrics.hpp"

namespace sepgl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

SolveConfig search_config(const Problem& problem, const SolveConfig& base, const LineSearchConfig& search)
{
    SolveConfig cfg = base;
    cfg.tol = search.tol;
    if (!cfg.lipschitz && cfg.step == StepRule::PowerIterationLipschitz) {
        cfg.lipschitz = lipschitz_constant(problem);
    }
    return cfg;
}

} // namespace

double find_lambda_max(const Problem& problem, const PenaltySpec& penalty, const SolveConfig& base,
                       const LineSearchConfig& search)
{
    SolveConfig cfg = search_config(problem, base, search);
    cfg.warm_start = Eigen::VectorXd::Zero(problem.p());
    bool have_zero = false;
    double last_zero = 0.0;
    for (int k = 0;; ++k) {
        const double lambda = search.max_start * std::pow(search.max_factor, k);
        if (lambda < search.max_floor) {
            throw Error(ErrorCode::SearchExhausted, "no variable selected for any lambda down to " +
                                                        std::to_string(search.max_floor));
        }
        cfg.lambda = lambda;
        Solution sol = fit(problem, penalty, cfg);
        if (sol.support_size() == 0) {
            have_zero = true;
            last_zero = lambda;
            cfg.warm_start = std::move(sol.beta);
            continue;
        }
        if (!have_zero) {
            throw Error(ErrorCode::SearchExhausted, "variables already selected at the starting lambda " +
                                                        std::to_string(search.max_start));
        }
        return last_zero;
    }
}

double find_lambda_min(const Problem& problem, const PenaltySpec& penalty, const SolveConfig& base,
                       const LineSearchConfig& search)
{
    SolveConfig cfg = search_config(problem, base, search);
    bool have_full = false;
    double last_full = 0.0;
    for (int k = 0;; ++k) {
        const double lambda = search.min_start * std::pow(search.min_factor, k);
        if (lambda > search.min_ceiling) {
            throw Error(ErrorCode::SearchExhausted, "full support retained for every lambda up to " +
                                                        std::to_string(search.min_ceiling));
        }
        cfg.lambda = lambda;
        Solution sol = fit(problem, penalty, cfg);
        if (sol.support_size() == problem.p()) {
            have_full = true;
            last_full = lambda;
            cfg.warm_start = std::move(sol.beta);
            continue;
        }
        if (!have_full) {
            throw Error(ErrorCode::NoFullSupport, "lambda " + std::to_string(search.min_start) +
                                                      " already drops " +
                                                      std::to_string(problem.p() - sol.support_size()) +
                                                      " variables");
        }
        return last_full;
    }
}

std::vector<double> log_grid(double lambda_min, double lambda_max, int k)
{
    if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min) || !std::isfinite(lambda_max) || k < 1) {
        throw Error(ErrorCode::InvalidRange, "need 0 < lambda_min <= lambda_max and k >= 1");
    }
    if (lambda_min == lambda_max || k == 1) {
        return {lambda_max};
    }
    std::vector<double> grid(static_cast<std::size_t>(k));
    const double log_hi = std::log(lambda_max);
    const double log_lo = std::log(lambda_min);
    for (int i = 0; i < k; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(k - 1);
        grid[static_cast<std::size_t>(i)] = std::exp(log_hi + frac * (log_lo - log_hi));
    }
    grid.front() = lambda_max;
    grid.back() = lambda_min;
    return grid;
}

PathResult solve_path(const Problem& problem, const PenaltySpec& penalty, const std::vector<double>& grid,
                      const SolveConfig& config)
{
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] < grid[i - 1])) {
            throw Error(ErrorCode::InvalidRange, "lambda grid must be strictly decreasing");
        }
    }
    PathResult result;
    result.lambdas = grid;
    result.solutions.reserve(grid.size());
    result.support_sizes.reserve(grid.size());

    const auto start = Clock::now();
    SolveConfig cfg = config;
    if (!cfg.lipschitz && cfg.step == StepRule::PowerIterationLipschitz) {
        cfg.lipschitz = lipschitz_constant(problem);
    }
    for (double lambda : grid) {
        cfg.lambda = lambda;
        Solution sol;
        try {
            sol = fit(problem, penalty, cfg);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " (lambda = " + std::to_string(lambda) + ")");
        }
        cfg.warm_start = sol.beta;
        result.support_sizes.push_back(sol.support_size());
        result.solutions.push_back(std::move(sol));
    }
    result.total_time = seconds_since(start);
    if (!grid.empty()) {
        result.lambda_max = grid.front();
        result.lambda_min = grid.back();
    }
    return result;
}

PathResult regularization_path(const Problem& problem, const PenaltySpec& penalty, const SolveConfig& config,
                               int grid_size, const LineSearchConfig& search)
{
    const auto start = Clock::now();
    SolveConfig base = config;
    if (!base.lipschitz && base.step == StepRule::PowerIterationLipschitz) {
        base.lipschitz = lipschitz_constant(problem);
    }
    base.warm_start.reset();
    const double lambda_max = find_lambda_max(problem, penalty, base, search);
    double lambda_min = search.min_start;
    bool floored = false;
    try {
        lambda_min = find_lambda_min(problem, penalty, base, search);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoFullSupport) {
            throw;
        }
        floored = true;
    }
    lambda_min = std::min(lambda_min, lambda_max);
    const double search_time = seconds_since(start);

    SolveConfig path_cfg = config;
    path_cfg.warm_start.reset();
    PathResult result = solve_path(problem, penalty, log_grid(lambda_min, lambda_max, grid_size), path_cfg);
    result.lambda_max = lambda_max;
    result.lambda_min = lambda_min;
    result.lambda_min_floored = floored;
    result.search_time = search_time;
    return result;
}

BestMetrics best_metrics(const PathResult& path, const Eigen::VectorXd& beta_star)
{
    if (beta_star.norm() == 0.0) {
        throw Error(ErrorCode::ZeroTruth, "true coefficient vector is zero");
    }
    if (path.solutions.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty path");
    }
    BestMetrics best;
    best.rel_error = kInf;
    best.support_discrepancy = kInf;
    for (std::size_t i = 0; i < path.solutions.size(); ++i) {
        const auto& beta = path.solutions[i].beta;
        const double err = relative_l2_error(beta, beta_star);
        const double disc = support_discrepancy(beta, beta_star);
        if (err < best.rel_error) {
            best.rel_error = err;
            best.rel_error_at = i;
        }
        if (disc < best.support_discrepancy) {
            best.support_discrepancy = disc;
            best.support_at = i;
        }
    }
    return best;
}

} // namespace sepgl
