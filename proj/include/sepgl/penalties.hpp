#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sepgl/group_model.hpp"

namespace sepgl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// sum_g w_g ||beta_{G_g}||_2 over possibly overlapping groups.
struct OverlappingGroupLasso {
    GroupStructure groups;
};

/// Group lasso over disjoint parts (the induced partition or any reweighting of it).
struct SeparableGroupLasso {
    InducedPartition partition;
};

/// sum_j c_j |beta_j|.
struct WeightedLasso {
    Eigen::VectorXd weights;
};

/// (sum_g w_g ||beta_{G_g}||_{q2}^{q1})^{1/q1}; q1 = inf gives max_g w_g ||beta_{G_g}||_{q2}.
struct GeneralLq {
    Index p = 0;
    std::vector<IndexSet> groups;
    std::vector<double> weights;
    double q1 = 1.0;
    double q2 = 2.0;
};

struct PenaltySpec {
    std::variant<OverlappingGroupLasso, SeparableGroupLasso, WeightedLasso, GeneralLq> kind;
    /// Multiplies lambda at solve time.
    double scale = 1.0;

    static PenaltySpec overlapping(GroupStructure gs);
    static PenaltySpec separable(InducedPartition part);
    static PenaltySpec weighted_lasso(Eigen::VectorXd c);
    /// Weighted lasso with c_j = sum of w_g over groups containing j.
    static PenaltySpec weighted_lasso(const GroupStructure& gs);
    static PenaltySpec general(Index p, std::vector<IndexSet> groups, std::vector<double> weights,
                               double q1, double q2);

    Index dimension() const;
    std::string label() const;
};

double phi(const Eigen::VectorXd& beta, const GroupStructure& gs);
double psi(const Eigen::VectorXd& beta, const InducedPartition& part);
double weighted_lasso(const Eigen::VectorXd& beta, const Eigen::VectorXd& c);

/// ||x||_q for q in (0, inf]; for q < 1 this is the usual quasi-norm.
double lq_vector_norm(const Eigen::VectorXd& x, double q);

double lq_norm(const Eigen::VectorXd& beta, const std::vector<IndexSet>& groups,
               const std::vector<double>& weights, double q1, double q2);

/// Value of the penalty norm (the scale is not applied).
double evaluate(const PenaltySpec& penalty, const Eigen::VectorXd& beta);

/// max_g ||(H v)_{G_g}||_2 / w_g with H = diag(1 / overlap degree).
double dual_upper_bound(const Eigen::VectorXd& v, const GroupStructure& gs);

/// Closed-form dual norms of the separable penalties.
double separable_dual_norm(const Eigen::VectorXd& v, const InducedPartition& part);
double lasso_dual_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& c);

/// Exact dual norm where a closed form exists (separable, weighted lasso);
/// for the overlapping penalty this returns dual_upper_bound.
double dual_norm_or_bound(const Eigen::VectorXd& v, const PenaltySpec& penalty);

/// Euclidean projection onto {u : penalty(u) <= radius}.
Eigen::VectorXd project_onto_ball(const Eigen::VectorXd& z, const PenaltySpec& penalty,
                                  double radius = 1.0);

struct DualEstimateOptions {
    int bisection_steps = 60;
    double prox_tol = 1e-12;
    /// Per prox call; a truncated call still yields a valid (possibly weaker) bound.
    int prox_max_sweeps = 1000;
};

/**
 * Lower estimate of sup { u^T v : penalty(u) <= 1 }. Bisects tau over
 * [0, dual_norm_or_bound(v)] with prox_{tau penalty}(v); each nonzero prox
 * output beta is scored as the feasible point beta / penalty(beta), so the
 * estimate never exceeds the true dual norm, whatever the prox accuracy.
 */
double dual_estimate(const Eigen::VectorXd& v, const PenaltySpec& penalty, const DualEstimateOptions& options = {});

struct SandwichResult {
    double phi = 0.0;
    double psi = 0.0;
    double wlasso = 0.0;
    bool single_part = false;
    bool ok = true;
    /// Largest relative violation of either inequality (0 when none).
    double violation = 0.0;
};

/// phi <= psi <= weighted lasso, with equality phi = psi on single-part supports.
SandwichResult sandwich_check(const GroupStructure& gs, const InducedPartition& part,
                              const Eigen::VectorXd& beta);

} // namespace sepgl
