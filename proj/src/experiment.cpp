#include "sepgl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <omp.h>

#include <json.hpp>

#include "sepgl/io.hpp"

namespace sepgl {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void config_error(std::size_t line, const std::string& reason)
{
    throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line) + ": " + reason);
}

template <typename Int>
Int parse_int(std::string_view v, std::size_t line, std::string_view key)
{
    Int out{};
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || ptr != end) {
        config_error(line, std::string(key) + " expects an integer, got '" + std::string(v) + "'");
    }
    return out;
}

double parse_real(std::string_view v, std::size_t line, std::string_view key)
{
    try {
        const double x = parse_double(v);
        if (!std::isfinite(x)) {
            throw Error(ErrorCode::NonNumericCell, "not finite");
        }
        return x;
    } catch (const Error&) {
        config_error(line, std::string(key) + " expects a finite number, got '" + std::string(v) + "'");
    }
}

std::string structure_name(StructureKind s)
{
    switch (s) {
    case StructureKind::Interlocking: return "interlocking";
    case StructureKind::Nested: return "nested";
    case StructureKind::FromFile: return "file";
    }
    return "?";
}

std::string weight_rule_name(WeightRule w)
{
    switch (w) {
    case WeightRule::SqrtSize: return "sqrt";
    case WeightRule::InverseSize: return "inverse";
    case WeightRule::Uniform: return "uniform";
    case WeightRule::Custom: return "custom";
    }
    return "?";
}

std::string beta_rule_name(BetaRule b)
{
    return b == BetaRule::RandomGroups ? "random" : "nested_first";
}

void validate_config(const ExperimentConfig& c)
{
    validate(c.sim);
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (c.methods.empty()) {
        fail("methods must not be empty");
    }
    std::set<Method> seen(c.methods.begin(), c.methods.end());
    if (seen.size() != c.methods.size()) {
        fail("methods must not repeat");
    }
    if (c.replicates < 1) {
        fail("replicates must be at least 1");
    }
    if (c.grid_size < 1) {
        fail("grid_size must be at least 1");
    }
    if (!(c.tol > 0.0) || !(c.prox_tol > 0.0)) {
        fail("tolerances must be positive");
    }
    if (c.max_iter < 1) {
        fail("max_iter must be at least 1");
    }
}

ResultRecord run_method(const ExperimentConfig& config, const SimDesign& design, const SimData& data,
                        int replicate, Method method)
{
    ResultRecord rec;
    rec.replicate = replicate;
    rec.method = method;
    rec.grid_size = config.grid_size;

    SolveConfig solve;
    solve.tol = config.tol;
    solve.max_iter = config.max_iter;
    solve.prox_tol = config.prox_tol;
    const PenaltySpec penalty = method_penalty(method, design, config.sim.weight_rule);
    const PathResult path = regularization_path(data.problem, penalty, solve, config.grid_size);
    const BestMetrics best = best_metrics(path, data.beta_star);

    rec.lambda_max = path.lambda_max;
    rec.lambda_min = path.lambda_min;
    rec.lambda_min_floored = path.lambda_min_floored;
    rec.grid_size = static_cast<int>(path.lambdas.size());
    rec.best_rel_error = best.rel_error;
    rec.best_rel_error_lambda = path.lambdas[best.rel_error_at];
    rec.best_support_discrepancy = best.support_discrepancy;
    rec.best_support_lambda = path.lambdas[best.support_at];
    for (const auto& sol : path.solutions) {
        rec.iterations += sol.iterations;
        rec.prox_unconverged += sol.prox_unconverged;
    }
    rec.path_seconds = path.total_time;
    rec.search_seconds = path.search_time;
    rec.ok = true;
    return rec;
}

} // namespace

std::string to_string(Method method)
{
    switch (method) {
    case Method::Ogl: return "ogl";
    case Method::Sep: return "sep";
    case Method::WLasso: return "wlasso";
    case Method::SepUniform: return "sep_uniform";
    case Method::SepSize: return "sep_size";
    }
    return "?";
}

Method parse_method(std::string_view name)
{
    for (Method m : {Method::Ogl, Method::Sep, Method::WLasso, Method::SepUniform, Method::SepSize}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw Error(ErrorCode::InvalidConfig, "unknown method '" + std::string(name) + "'");
}

ExperimentConfig parse_config(std::string_view text)
{
    ExperimentConfig c;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            config_error(lineno, "expected key = value");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view v = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) {
            config_error(lineno, "duplicate key '" + key + "'");
        }
        if (key == "structure") {
            if (v == "interlocking") c.sim.structure = StructureKind::Interlocking;
            else if (v == "nested") c.sim.structure = StructureKind::Nested;
            else if (v == "file") c.sim.structure = StructureKind::FromFile;
            else config_error(lineno, "unknown structure '" + std::string(v) + "'");
        } else if (key == "m") {
            c.sim.m = parse_int<Index>(v, lineno, key);
        } else if (key == "d") {
            c.sim.d = parse_int<Index>(v, lineno, key);
        } else if (key == "overlap_frac") {
            c.sim.overlap_frac = parse_real(v, lineno, key);
        } else if (key == "step") {
            c.sim.step = parse_int<Index>(v, lineno, key);
        } else if (key == "group_file") {
            c.sim.group_file = std::string(v);
        } else if (key == "n") {
            c.sim.n = parse_int<Index>(v, lineno, key);
        } else if (key == "sigma2") {
            c.sim.sigma2 = parse_real(v, lineno, key);
        } else if (key == "zero_frac") {
            c.sim.zero_frac = parse_real(v, lineno, key);
        } else if (key == "weight_rule") {
            if (v == "sqrt") c.sim.weight_rule = WeightRule::SqrtSize;
            else if (v == "inverse") c.sim.weight_rule = WeightRule::InverseSize;
            else if (v == "uniform") c.sim.weight_rule = WeightRule::Uniform;
            else if (v == "custom") c.sim.weight_rule = WeightRule::Custom;
            else config_error(lineno, "unknown weight_rule '" + std::string(v) + "'");
        } else if (key == "beta_rule") {
            if (v == "random") c.sim.beta_rule = BetaRule::RandomGroups;
            else if (v == "nested_first") c.sim.beta_rule = BetaRule::FirstGroupsNested;
            else config_error(lineno, "unknown beta_rule '" + std::string(v) + "'");
        } else if (key == "methods") {
            c.methods.clear();
            std::size_t s = 0;
            while (s <= v.size()) {
                auto comma = v.find(',', s);
                if (comma == std::string_view::npos) {
                    comma = v.size();
                }
                try {
                    c.methods.push_back(parse_method(trim(v.substr(s, comma - s))));
                } catch (const Error& e) {
                    config_error(lineno, e.what());
                }
                s = comma + 1;
            }
        } else if (key == "replicates") {
            c.replicates = parse_int<int>(v, lineno, key);
        } else if (key == "seed") {
            c.sim.seed = parse_int<std::uint64_t>(v, lineno, key);
        } else if (key == "tol") {
            c.tol = parse_real(v, lineno, key);
        } else if (key == "max_iter") {
            c.max_iter = parse_int<int>(v, lineno, key);
        } else if (key == "grid_size") {
            c.grid_size = parse_int<int>(v, lineno, key);
        } else if (key == "prox_tol") {
            c.prox_tol = parse_real(v, lineno, key);
        } else {
            config_error(lineno, "unknown key '" + key + "'");
        }
    }
    validate_config(c);
    return c;
}

std::string serialize_config(const ExperimentConfig& c)
{
    std::string methods;
    for (std::size_t i = 0; i < c.methods.size(); ++i) {
        methods += (i ? "," : "") + to_string(c.methods[i]);
    }
    std::string out;
    auto put = [&out](const char* key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    put("structure", structure_name(c.sim.structure));
    put("m", std::to_string(c.sim.m));
    put("d", std::to_string(c.sim.d));
    put("overlap_frac", format_double(c.sim.overlap_frac));
    put("step", std::to_string(c.sim.step));
    put("group_file", c.sim.group_file);
    put("n", std::to_string(c.sim.n));
    put("sigma2", format_double(c.sim.sigma2));
    put("zero_frac", format_double(c.sim.zero_frac));
    put("weight_rule", weight_rule_name(c.sim.weight_rule));
    put("beta_rule", beta_rule_name(c.sim.beta_rule));
    put("methods", methods);
    put("replicates", std::to_string(c.replicates));
    put("seed", std::to_string(c.sim.seed));
    put("tol", format_double(c.tol));
    put("max_iter", std::to_string(c.max_iter));
    put("grid_size", std::to_string(c.grid_size));
    put("prox_tol", format_double(c.prox_tol));
    return out;
}

std::uint64_t config_hash(const ExperimentConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t hash)
{
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[hash & 0xF];
        hash >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

PenaltySpec method_penalty(Method method, const SimDesign& design, WeightRule base)
{
    switch (method) {
    case Method::Ogl:
        return PenaltySpec::overlapping(design.groups);
    case Method::Sep:
        return PenaltySpec::separable(design.partition);
    case Method::WLasso:
        return PenaltySpec::weighted_lasso(design.groups);
    case Method::SepUniform:
        return PenaltySpec::separable(
            design.partition.with_weights(alt_weights(design.partition, PartWeighting::Uniform, base)));
    case Method::SepSize:
        return PenaltySpec::separable(
            design.partition.with_weights(alt_weights(design.partition, PartWeighting::SizeDependent, base)));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown method");
}

std::vector<ReplicateSummary> ExperimentResult::summaries() const
{
    std::vector<ReplicateSummary> out;
    for (const auto& rec : records) {
        if (rec.ok) {
            out.push_back({to_string(rec.method), rec.path_seconds, rec.best_rel_error, rec.best_support_discrepancy,
                           static_cast<std::uint64_t>(rec.replicate)});
        }
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress)
{
    validate_config(config);
    ExperimentResult result;
    result.config = config;
    result.hash = config_hash(config);

    const SimDesign design = prepare_design(config.sim);
    result.theta_diag_min = design.theta.diagonal().minCoeff();
    result.theta_diag_max = design.theta.diagonal().maxCoeff();

    const int R = config.replicates;
    const int M = static_cast<int>(config.methods.size());
    result.records.resize(static_cast<std::size_t>(R * M));

#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < R; ++r) {
        SimData data;
        std::string setup_error;
        ErrorCode setup_code = ErrorCode::InvalidArgument;
        try {
            data = simulate_replicate(config.sim, design, static_cast<std::uint64_t>(r));
        } catch (const Error& e) {
            setup_error = e.what();
            setup_code = e.code();
        }
        for (int k = 0; k < M; ++k) {
            const Method method = config.methods[static_cast<std::size_t>(k)];
            ResultRecord rec;
            ErrorCode code = setup_code;
            if (setup_error.empty()) {
                try {
                    rec = run_method(config, design, data, r, method);
                } catch (const Error& e) {
                    rec.error = e.what();
                    code = e.code();
                } catch (const std::exception& e) {
                    rec.error = e.what();
                }
            } else {
                rec.error = setup_error;
            }
            rec.replicate = r;
            rec.method = method;
#pragma omp critical(sepgl_experiment_writer)
            {
                if (!rec.ok && !result.failed) {
                    result.failed = true;
                    result.failure_code = code;
                    result.failure_message = "replicate " + std::to_string(r) + ", method " + to_string(method) +
                                             ": " + rec.error;
                }
                if (progress) {
                    progress(rec);
                }
            }
            result.records[static_cast<std::size_t>(r * M + k)] = std::move(rec);
        }
    }
    return result;
}

std::string results_csv(const ExperimentResult& result)
{
    std::string out = "config_hash,replicate,method,status,lambda_max,lambda_min,lambda_min_floored,grid_size,"
                      "best_rel_error,best_rel_error_lambda,best_support_discrepancy,best_support_lambda,"
                      "iterations,prox_unconverged\n";
    const std::string hash = hash_hex(result.hash);
    for (const auto& rec : result.records) {
        out += hash + ',' + std::to_string(rec.replicate) + ',' + to_string(rec.method) + ',';
        if (!rec.ok) {
            out += "error,,,,,,,,,,\n";
            continue;
        }
        out += "ok,";
        out += format_double(rec.lambda_max) + ',';
        out += format_double(rec.lambda_min) + ',';
        out += std::string(rec.lambda_min_floored ? "1" : "0") + ',';
        out += std::to_string(rec.grid_size) + ',';
        out += format_double(rec.best_rel_error) + ',';
        out += format_double(rec.best_rel_error_lambda) + ',';
        out += format_double(rec.best_support_discrepancy) + ',';
        out += format_double(rec.best_support_lambda) + ',';
        out += std::to_string(rec.iterations) + ',';
        out += std::to_string(rec.prox_unconverged) + '\n';
    }
    return out;
}

std::string timings_csv(const ExperimentResult& result)
{
    std::string out = "config_hash,replicate,method,path_seconds,search_seconds\n";
    const std::string hash = hash_hex(result.hash);
    for (const auto& rec : result.records) {
        out += hash + ',' + std::to_string(rec.replicate) + ',' + to_string(rec.method) + ',';
        out += rec.ok ? format_double(rec.path_seconds) + ',' + format_double(rec.search_seconds) : std::string(",");
        out += '\n';
    }
    return out;
}

std::string results_json(const ExperimentResult& result)
{
    using nlohmann::json;
    json doc;
    doc["schema"] = 1;
    doc["config_hash"] = hash_hex(result.hash);
    doc["config_text"] = serialize_config(result.config);

    json cfg = json::object();
    const std::string text = serialize_config(result.config);
    std::size_t start = 0;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        const std::string_view line(text.data() + start, end - start);
        const auto eq = line.find(" = ");
        cfg[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 3));
        start = end + 1;
    }
    doc["config"] = cfg;
    doc["metadata"] = {{"theta_diagonal_min", result.theta_diag_min},
                       {"theta_diagonal_max", result.theta_diag_max},
                       {"theta_renormalized", false},
                       {"timing", "steady clock around the path loop; line searches in search_seconds"},
                       {"support_test", "exact zero"}};
    if (result.config.sim.structure == StructureKind::FromFile) {
        doc["metadata"]["group_weights"] = "as given in the group file, or the weight rule on post-filter sizes";
    }

    json records = json::array();
    for (const auto& rec : result.records) {
        json r = {{"replicate", rec.replicate}, {"method", to_string(rec.method)}, {"ok", rec.ok}};
        if (rec.ok) {
            r["lambda_max"] = rec.lambda_max;
            r["lambda_min"] = rec.lambda_min;
            r["lambda_min_floored"] = rec.lambda_min_floored;
            r["grid_size"] = rec.grid_size;
            r["best_rel_error"] = rec.best_rel_error;
            r["best_rel_error_lambda"] = rec.best_rel_error_lambda;
            r["best_support_discrepancy"] = rec.best_support_discrepancy;
            r["best_support_lambda"] = rec.best_support_lambda;
            r["iterations"] = rec.iterations;
            r["prox_unconverged"] = rec.prox_unconverged;
            r["path_seconds"] = rec.path_seconds;
            r["search_seconds"] = rec.search_seconds;
        } else {
            r["error"] = rec.error;
        }
        records.push_back(std::move(r));
    }
    doc["records"] = std::move(records);

    json summary = json::array();
    const auto reps = result.summaries();
    for (Method m : result.config.methods) {
        std::vector<ReplicateSummary> mine;
        for (const auto& s : reps) {
            if (s.method == to_string(m)) {
                mine.push_back(s);
            }
        }
        if (mine.size() < 2) {
            summary.push_back({{"method", to_string(m)}, {"replicates", mine.size()}, {"note", "fewer than two replicates"}});
            continue;
        }
        const MethodSummary s = summarize(mine).front();
        auto ci = [](const MeanCI& c) { return json{{"mean", c.mean}, {"half_width", c.half_width}}; };
        summary.push_back({{"method", s.method},
                           {"replicates", s.replicates},
                           {"path_seconds", ci(s.time_seconds)},
                           {"best_rel_error", ci(s.best_rel_error)},
                           {"best_support_discrepancy", ci(s.best_support_discrepancy)}});
    }
    doc["summary"] = std::move(summary);
    doc["interval"] = "normal approximation: mean +- 1.96 * sd / sqrt(R)";
    if (result.failed) {
        doc["failure"] = {{"code", std::string(to_string(result.failure_code))}, {"message", result.failure_message}};
    }
    return doc.dump(2) + "\n";
}

} // namespace sepgl
