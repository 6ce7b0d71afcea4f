#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sepgl/metrics.hpp"
#include "sepgl/path.hpp"
#include "sepgl/simgen.hpp"

namespace sepgl {

enum class Method {
    Ogl,        ///< overlapping group lasso
    Sep,        ///< separable relaxation with merged weights
    WLasso,     ///< weighted lasso
    SepUniform, ///< induced parts, unit weights
    SepSize,    ///< induced parts, weights from part sizes
};

std::string to_string(Method method);
Method parse_method(std::string_view name);

/**
 * Flat `key = value` document; '#' starts a comment. Keys: structure
 * (interlocking|nested|file), m, d, overlap_frac, step, group_file, n,
 * sigma2, zero_frac, weight_rule (sqrt|inverse|uniform|custom), beta_rule
 * (random|nested_first), methods (comma list of ogl, sep, wlasso,
 * sep_uniform, sep_size), replicates, seed, tol, max_iter, grid_size,
 * prox_tol. Omitted keys keep their defaults.
 */
struct ExperimentConfig {
    SimSpec sim;
    std::vector<Method> methods{Method::Ogl, Method::Sep, Method::WLasso};
    int replicates = 10;
    double tol = 1e-5;
    int max_iter = 20000;
    int grid_size = 50;
    double prox_tol = 1e-10;
};

ExperimentConfig parse_config(std::string_view text);
/// Every key in a fixed order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);
/// 64-bit FNV-1a of the canonical serialization.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string hash_hex(std::uint64_t hash);

PenaltySpec method_penalty(Method method, const SimDesign& design, WeightRule base);

struct ResultRecord {
    int replicate = 0;
    Method method = Method::Ogl;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    bool lambda_min_floored = false;
    int grid_size = 0;
    double best_rel_error = 0.0;
    double best_rel_error_lambda = 0.0;
    double best_support_discrepancy = 0.0;
    double best_support_lambda = 0.0;
    long iterations = 0;
    int prox_unconverged = 0;
    double path_seconds = 0.0;
    double search_seconds = 0.0;
    bool ok = false;
    std::string error;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::uint64_t hash = 0;
    /// Replicate-major, methods in config order.
    std::vector<ResultRecord> records;
    /// Realized diagonal range of the projected covariance.
    double theta_diag_min = 0.0;
    double theta_diag_max = 0.0;
    bool failed = false;
    ErrorCode failure_code = ErrorCode::InvalidArgument;
    std::string failure_message;

    std::vector<ReplicateSummary> summaries() const;
};

using ProgressFn = std::function<void(const ResultRecord&)>;

/**
 * Replicates run concurrently (bounded by the OpenMP thread count); each
 * replicate draws from its own substreams and runs its methods in order, so
 * records do not depend on scheduling. A failing (replicate, method) is kept
 * with its error and the run is marked failed; finished records are still
 * returned.
 */
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Fixed columns, no timings: identical bytes on every re-run.
std::string results_csv(const ExperimentResult& result);
/// Per-record path and search times.
std::string timings_csv(const ExperimentResult& result);
/// Schema 1: config, hash, records with timings, per-method mean and 95% normal interval.
std::string results_json(const ExperimentResult& result);

} // namespace sepgl
