#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sepgl/penalties.hpp"
#include "sepgl/prox.hpp"

namespace sepgl {

enum class Loss { Squared, Logistic };

/// Regression problem: X is n x p, y has length n ({0,1} for logistic loss).
struct Problem {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Loss loss = Loss::Squared;

    Index n() const noexcept { return X.rows(); }
    Index p() const noexcept { return X.cols(); }
};

/// Throws on empty, mismatched, non-finite or (logistic) non-binary input.
void validate(const Problem& problem);

enum class StepRule { PowerIterationLipschitz, Backtracking };

struct SolveConfig {
    double lambda = 0.0;
    /// Absolute change of the objective between accepted iterates.
    double tol = 1e-5;
    int max_iter = 20000;
    StepRule step = StepRule::PowerIterationLipschitz;
    double backtrack_factor = 0.5;
    double prox_tol = 1e-10;
    int prox_max_sweeps = 10000;
    /// Reuse BCD duals between consecutive prox calls of one fit.
    bool warm_start_duals = false;
    std::optional<Eigen::VectorXd> warm_start;
    /// Precomputed Lipschitz constant of the loss gradient (skips power iteration).
    std::optional<double> lipschitz;
};

struct Solution {
    Eigen::VectorXd beta;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    long prox_sweeps_total = 0;
    /// Inner BCD calls that stopped at the sweep cap.
    int prox_unconverged = 0;
    double lipschitz = 0.0;
    double wall_time = 0.0;
    /// Accepted objective values, starting with the initial point.
    std::vector<double> objective_trace;

    Index support_size() const;
};

/// Smooth loss only: (1/2n)||y - X beta||^2 or mean logistic deviance.
double loss_value(const Problem& problem, const Eigen::VectorXd& beta);

/// Loss plus lambda * scale * penalty(beta).
double objective(const Problem& problem, const Eigen::VectorXd& beta, const PenaltySpec& penalty, double lambda);

Eigen::VectorXd grad_loss(const Problem& problem, const Eigen::VectorXd& beta);

/// Largest eigenvalue of X^T X / n by power iteration.
double spectral_norm_sq_over_n(const Eigen::MatrixXd& X, int max_iter = 100, double rel_tol = 1e-8);

/// Lipschitz constant of grad_loss: sigma_max(X)^2 / n, divided by 4 for logistic loss.
double lipschitz_constant(const Problem& problem);

/**
 * Accelerated proximal gradient (FISTA) with adaptive restart: an iterate that
 * would increase the objective is discarded and the momentum reset, so the
 * accepted objective sequence is non-increasing. Stops once consecutive
 * accepted objectives differ by at most `tol`.
 */
Solution fit(const Problem& problem, const PenaltySpec& penalty, const SolveConfig& config);

/**
 * Stationarity residual of beta. For separable penalties and the weighted
 * lasso it is exact: the subgradient residual on nonzero blocks and the dual
 * norm excess on zero blocks. For the overlapping penalty the zero blocks are
 * checked with the dual upper bound, so the gap can be positive at an optimum.
 */
double kkt_gap(const Problem& problem, const Eigen::VectorXd& beta, const PenaltySpec& penalty, double lambda);

} // namespace sepgl
