#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sepgl {

/// ||beta_hat - beta_star||_2 / ||beta_star||_2. Throws ZeroTruth.
double relative_l2_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star);

/// Fraction of coordinates whose zero/nonzero status differs. Exact zero test:
/// threshold estimates from other solvers before calling.
double support_discrepancy(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star);

/// Mann-Whitney AUC with midranks for ties. Throws SingleClass.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct ReplicateSummary {
    std::string method;
    double time_seconds = 0.0;
    double best_rel_error = 0.0;
    double best_support_discrepancy = 0.0;
    std::uint64_t seed = 0;
};

/// Mean with a normal-approximation 95% interval: mean +- 1.96 sd / sqrt(R).
struct MeanCI {
    double mean = 0.0;
    double half_width = 0.0;
    double lower() const { return mean - half_width; }
    double upper() const { return mean + half_width; }
};

/// Throws TooFewReplicates for fewer than two values.
MeanCI mean_ci(const std::vector<double>& values);

struct MethodSummary {
    std::string method;
    int replicates = 0;
    MeanCI time_seconds;
    MeanCI best_rel_error;
    MeanCI best_support_discrepancy;
};

/// One summary per method, in order of first appearance.
std::vector<MethodSummary> summarize(const std::vector<ReplicateSummary>& replicates);

} // namespace sepgl
