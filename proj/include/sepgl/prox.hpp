#pragma once

#include <vector>

#include <Eigen/Core>

#include "sepgl/group_model.hpp"
#include "sepgl/penalties.hpp"

namespace sepgl {

enum class SweepOrder {
    Auto,      ///< Tree order when the groups are tree-structured, else ascending.
    Ascending, ///< Group ids 0..m-1 every sweep.
    Tree,      ///< Inner groups before the groups containing them; one sweep.
};

struct ProxOptions {
    double tol = 1e-10;
    int max_sweeps = 10000;
    SweepOrder order = SweepOrder::Auto;
    /// Record 0.5 * ||mu - sum xi||^2 after every sweep.
    bool record_history = false;
};

struct ProxResult {
    Eigen::VectorXd beta;
    /// xi^g restricted to G_g, in the order of gs.group(g).
    std::vector<Eigen::VectorXd> duals;
    int sweeps = 0;
    /// Largest dual block change during the last sweep.
    double residual = 0.0;
    bool converged = true;
    std::vector<double> dual_objective_history;
};

/// Block soft-thresholding on each part with threshold lambda * part weight.
Eigen::VectorXd prox_separable(const Eigen::VectorXd& mu, double lambda, const InducedPartition& part);

/// sign(mu_j) * max(|mu_j| - lambda c_j, 0).
Eigen::VectorXd prox_soft_threshold(const Eigen::VectorXd& mu, double lambda, const Eigen::VectorXd& c);

/**
 * Proximal operator of the overlapping group lasso by block coordinate
 * descent on the dual. Each block update projects
 * r^g = mu - sum_{h != g} xi^h (restricted to G_g) onto the ball of radius
 * lambda w_g. Stops when the largest block change in a sweep is <= tol.
 * Tree-structured inputs visited in tree order finish after one sweep.
 *
 * `warm_duals`, when given and correctly shaped, seeds the dual blocks.
 * MaxSweepsExceeded is reported via `converged == false`.
 */
ProxResult prox_overlapping_bcd(const Eigen::VectorXd& mu, double lambda, const GroupStructure& gs,
                                const ProxOptions& options = {},
                                const std::vector<Eigen::VectorXd>* warm_duals = nullptr);

/// Group visiting order, resolved once per structure.
struct BcdPlan {
    std::vector<Index> order;
    /// Tree order: a single sweep is exact.
    bool one_sweep = false;
};

BcdPlan make_bcd_plan(const GroupStructure& gs, SweepOrder order);

/// Same as above with a precomputed plan (options.order is ignored).
ProxResult prox_overlapping_bcd(const Eigen::VectorXd& mu, double lambda, const GroupStructure& gs,
                                const BcdPlan& plan, const ProxOptions& options,
                                const std::vector<Eigen::VectorXd>* warm_duals = nullptr);

struct ProxCertificate {
    double dual_infeasibility = 0.0;
    double linking = 0.0;
    double alignment = 0.0;
    bool optimal(double tol) const
    {
        return dual_infeasibility <= tol && linking <= tol && alignment <= tol;
    }
};

/// Optimality residuals of an overlapping prox result.
ProxCertificate prox_certificate(const ProxResult& result, const Eigen::VectorXd& mu, double lambda,
                                 const GroupStructure& gs);

/// Dispatches on the penalty kind. GeneralLq is supported when it reduces to
/// a group lasso (q1 = 1, q2 = 2, disjoint groups) or a weighted lasso (q1 = q2 = 1).
Eigen::VectorXd prox(const PenaltySpec& penalty, const Eigen::VectorXd& mu, double lambda,
                     const ProxOptions& options = {});

} // namespace sepgl
