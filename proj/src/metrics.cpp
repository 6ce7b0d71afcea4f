#include "sepgl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sepgl/error.hpp"

namespace sepgl {

double relative_l2_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star)
{
    if (beta_hat.size() != beta_star.size()) {
        throw Error(ErrorCode::DimensionMismatch, "estimate and truth differ in length");
    }
    const double denom = beta_star.norm();
    if (denom == 0.0) {
        throw Error(ErrorCode::ZeroTruth, "true coefficient vector is zero");
    }
    return (beta_hat - beta_star).norm() / denom;
}

double support_discrepancy(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star)
{
    if (beta_hat.size() != beta_star.size()) {
        throw Error(ErrorCode::DimensionMismatch, "estimate and truth differ in length");
    }
    if (beta_star.size() == 0) {
        return 0.0;
    }
    Eigen::Index mismatches = 0;
    for (Eigen::Index j = 0; j < beta_star.size(); ++j) {
        mismatches += (beta_hat[j] != 0.0) != (beta_star[j] != 0.0) ? 1 : 0;
    }
    return static_cast<double>(mismatches) / static_cast<double>(beta_star.size());
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels)
{
    if (scores.size() != labels.size()) {
        throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
    }
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks (1-based) over tied runs.
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            rank[order[k]] = mid;
        }
        i = j + 1;
    }

    double positives = 0.0;
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
        }
        if (labels[i] == 1) {
            positives += 1.0;
            rank_sum += rank[i];
        }
    }
    const double negatives = static_cast<double>(n) - positives;
    if (positives == 0.0 || negatives == 0.0) {
        throw Error(ErrorCode::SingleClass, "AUC needs both classes");
    }
    return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

MeanCI mean_ci(const std::vector<double>& values)
{
    if (values.size() < 2) {
        throw Error(ErrorCode::TooFewReplicates, "need at least two replicates, got " + std::to_string(values.size()));
    }
    const double r = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / r;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / (r - 1.0));
    return MeanCI{mean, 1.96 * sd / std::sqrt(r)};
}

std::vector<MethodSummary> summarize(const std::vector<ReplicateSummary>& replicates)
{
    std::vector<std::string> methods;
    for (const auto& rep : replicates) {
        if (std::find(methods.begin(), methods.end(), rep.method) == methods.end()) {
            methods.push_back(rep.method);
        }
    }
    std::vector<MethodSummary> out;
    for (const auto& method : methods) {
        std::vector<double> time;
        std::vector<double> err;
        std::vector<double> disc;
        for (const auto& rep : replicates) {
            if (rep.method == method) {
                time.push_back(rep.time_seconds);
                err.push_back(rep.best_rel_error);
                disc.push_back(rep.best_support_discrepancy);
            }
        }
        MethodSummary s;
        s.method = method;
        s.replicates = static_cast<int>(time.size());
        s.time_seconds = mean_ci(time);
        s.best_rel_error = mean_ci(err);
        s.best_support_discrepancy = mean_ci(disc);
        out.push_back(s);
    }
    return out;
}

} // namespace sepgl
