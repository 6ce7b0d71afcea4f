#pragma once

#include <vector>

#include <Eigen/Core>

#include "sepgl/solver.hpp"

namespace sepgl {

struct PathResult {
    /// Strictly decreasing.
    std::vector<double> lambdas;
    std::vector<Solution> solutions;
    std::vector<Index> support_sizes;
    /// Wall time of the path loop only (line searches excluded).
    double total_time = 0.0;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    /// The minimum search found no full-support lambda and fell back to its floor.
    bool lambda_min_floored = false;
    double search_time = 0.0;
};

struct LineSearchConfig {
    double max_start = 1e8;
    double max_factor = 0.9;
    double min_start = 1e-8;
    double min_factor = 1.1;
    /// Below this the maximum search gives up (degenerate response).
    double max_floor = 1e-12;
    /// Above this the minimum search gives up.
    double min_ceiling = 1e8;
    /// Tolerance of the fits made during the searches.
    double tol = 1e-4;
};

/// Smallest lambda on the grid 1e8 * 0.9^k whose fit is all zero while the next grid point is not.
double find_lambda_max(const Problem& problem, const PenaltySpec& penalty, const SolveConfig& base = {},
                       const LineSearchConfig& search = {});

/// Largest lambda on the grid 1e-8 * 1.1^k whose fit keeps all p variables while the next one drops some.
/// Throws NoFullSupport when the very first grid point already drops a variable.
double find_lambda_min(const Problem& problem, const PenaltySpec& penalty, const SolveConfig& base = {},
                       const LineSearchConfig& search = {});

/// k log-spaced values from lambda_max down to lambda_min, endpoints included.
std::vector<double> log_grid(double lambda_min, double lambda_max, int k = 50);

/// Solves along a descending grid, warm-starting each fit from the previous one.
PathResult solve_path(const Problem& problem, const PenaltySpec& penalty, const std::vector<double>& grid,
                      const SolveConfig& config);

/**
 * Line searches for both endpoints, then the log grid and the path. A
 * NoFullSupport minimum search falls back to `search.min_start` and sets
 * lambda_min_floored.
 */
PathResult regularization_path(const Problem& problem, const PenaltySpec& penalty, const SolveConfig& config,
                               int grid_size = 50, const LineSearchConfig& search = {});

struct BestMetrics {
    double rel_error = 0.0;
    double support_discrepancy = 0.0;
    /// Grid positions where each minimum was attained.
    std::size_t rel_error_at = 0;
    std::size_t support_at = 0;
};

/// Minimum relative l2 error and minimum support discrepancy over the path.
BestMetrics best_metrics(const PathResult& path, const Eigen::VectorXd& beta_star);

} // namespace sepgl
