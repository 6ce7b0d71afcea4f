#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sepgl/group_model.hpp"
#include "sepgl/rng.hpp"
#include "sepgl/solver.hpp"

namespace sepgl {

enum class WeightRule { SqrtSize, InverseSize, Uniform, Custom };
enum class StructureKind { Interlocking, Nested, FromFile };
enum class BetaRule { RandomGroups, FirstGroupsNested };
enum class CovarianceMode { Interlocking, Nested };
enum class PartWeighting { Proposed, Uniform, SizeDependent };

struct SimSpec {
    StructureKind structure = StructureKind::Interlocking;
    Index m = 5;
    Index d = 10;
    double overlap_frac = 0.2;
    Index step = 4;
    /// Used when structure == FromFile.
    std::string group_file;
    Index n = 100;
    double sigma2 = 3.0;
    double zero_frac = 0.9;
    WeightRule weight_rule = WeightRule::SqrtSize;
    BetaRule beta_rule = BetaRule::RandomGroups;
    std::uint64_t seed = 1;
};

/// Throws InvalidConfig on out-of-range fields.
void validate(const SimSpec& spec);

/// sqrt(d_g), 1/d_g or 1 per group. Custom is rejected (weights come from a file).
std::vector<double> rule_weights(const std::vector<IndexSet>& groups, WeightRule rule);

/// m groups of size d; neighbours share o = round(overlap_frac * d) variables.
GroupStructure interlocking_groups(Index m, Index d, double overlap_frac = 0.2,
                                   WeightRule rule = WeightRule::SqrtSize);

/// G_g = {0, ..., g * step - 1} for g = 1..m.
GroupStructure nested_groups(Index m, Index step = 4, WeightRule rule = WeightRule::InverseSize);

/// Random cover of [p] by m groups with weights in [0.5, 2]; for property tests and checks.
GroupStructure random_structure(Index p, Index m, CounterRng& rng);

/**
 * Correlation template (1 on the diagonal, 0.6 within an induced part, 0.36
 * within an original group across parts, 0 otherwise) projected onto
 * {symmetric, min eigenvalue >= 0.1} by eigenvalue clamping. Both modes use
 * the same cell rules; on nested chains the zero case never occurs.
 */
Eigen::MatrixXd build_covariance(const GroupStructure& gs, const InducedPartition& part,
                                 CovarianceMode mode = CovarianceMode::Interlocking);

/// Unprojected template, exposed for tests.
Eigen::MatrixXd covariance_template(const GroupStructure& gs, const InducedPartition& part);

/// n rows i.i.d. N(0, theta): standard normals drawn row by row, times L^T.
Eigen::MatrixXd sample_design(Index n, const Eigen::MatrixXd& theta, CounterRng& rng);

/// Number of groups zeroed for a fraction of m (guards against 0.9 * 50 = 45.000000000000007).
Index zeroed_group_count(double zero_frac, Index m);

/**
 * Coordinates i.i.d. N(10, 16) with independent fair sign flips, then zeroed
 * on the union of ceil(zero_frac * m) random groups (RandomGroups) or on
 * G_{ceil(zero_frac * m)} (FirstGroupsNested). Throws AllZeroTruth.
 */
Eigen::VectorXd gen_beta_star(const GroupStructure& gs, double zero_frac, BetaRule rule, CounterRng& rng);

/// y = X beta_star + eps, eps_i ~ N(0, sigma2).
Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta_star, double sigma2,
                             CounterRng& rng);

/// Weights on the induced parts: merged original weights, all ones, or the
/// base rule applied to part sizes.
std::vector<double> alt_weights(const InducedPartition& part, PartWeighting scheme,
                                WeightRule base = WeightRule::SqrtSize);

/// Group structure described by a spec (FromFile reads spec.group_file).
GroupStructure build_structure(const SimSpec& spec);

struct SimData {
    Problem problem;
    Eigen::VectorXd beta_star;
};

/// Fixed per-spec pieces, shared by all replicates.
struct SimDesign {
    GroupStructure groups;
    InducedPartition partition;
    Eigen::MatrixXd theta;
    Eigen::MatrixXd theta_factor;
};

SimDesign prepare_design(const SimSpec& spec, std::optional<GroupStructure> groups = std::nullopt);

/// Replicate r draws from its own streams (see CounterRng).
SimData simulate_replicate(const SimSpec& spec, const SimDesign& design, std::uint64_t replicate);

} // namespace sepgl
