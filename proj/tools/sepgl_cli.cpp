// sepgl: command-line front end for the solver library.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sepgl/checks.hpp"
#include "sepgl/experiment.hpp"
#include "sepgl/io.hpp"
#include "sepgl/kernels.hpp"
#include "sepgl/path.hpp"
#include "sepgl/prox.hpp"
#include "sepgl/simgen.hpp"

namespace {

using namespace sepgl;
using nlohmann::json;

struct Globals {
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
};

void emit(const Globals& g, const std::string& text)
{
    if (g.out.empty()) {
        std::cout << text;
    } else {
        write_text_file(g.out, text);
    }
}

PenaltySpec penalty_from(const std::string& kind, const GroupStructure& gs)
{
    if (kind == "ogl") {
        return PenaltySpec::overlapping(gs);
    }
    if (kind == "sep") {
        return PenaltySpec::separable(induce_partition(gs));
    }
    if (kind == "wlasso") {
        return PenaltySpec::weighted_lasso(gs);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown penalty '" + kind + "' (ogl, sep, wlasso)");
}

json vector_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

struct DataArgs {
    std::string groups;
    std::string gmt;
    std::string x;
    std::string y;
    std::string loss = "squared";

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--groups", groups, "Group file")->check(CLI::ExistingFile);
        cmd->add_option("--gmt", gmt, "GMT gene sets (X must carry a symbol header)")->check(CLI::ExistingFile);
        cmd->add_option("--x", x, "Design matrix CSV")->required()->check(CLI::ExistingFile);
        cmd->add_option("--y", y, "Response CSV (one column or row)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--loss", loss, "Loss")->check(CLI::IsMember({"squared", "logistic"}));
    }

    std::pair<Problem, GroupStructure> load() const
    {
        if (groups.empty() == gmt.empty()) {
            throw Error(ErrorCode::InvalidArgument, "give exactly one of --groups and --gmt");
        }
        Problem problem;
        GroupStructure gs;
        if (!gmt.empty()) {
            const CsvMatrix m = load_matrix_csv(read_text_file(x), true);
            GmtImport imp = import_gmt(read_text_file(gmt), m.header);
            for (const auto& w : imp.warnings) {
                std::cerr << "warning: " << w << "\n";
            }
            std::cerr << "gmt: kept " << imp.retained.size() << " of " << m.header.size()
                      << " columns; weights sqrt of filtered set sizes\n";
            problem.X = select_columns(m.values, imp.retained);
            gs = std::move(imp.groups);
        } else {
            problem.X = load_matrix_csv(read_text_file(x)).values;
            gs = parse_group_file(read_text_file(groups));
        }
        problem.y = load_vector_csv(read_text_file(y));
        problem.loss = loss == "logistic" ? Loss::Logistic : Loss::Squared;
        validate(problem);
        if (problem.p() != gs.p()) {
            throw Error(ErrorCode::DimensionMismatch, "X has " + std::to_string(problem.p()) +
                                                          " columns, groups cover " + std::to_string(gs.p()));
        }
        return {std::move(problem), std::move(gs)};
    }
};

int run_induce(const Globals& g, const std::string& file)
{
    const GroupStructure gs = parse_group_file(read_text_file(file));
    const InducedPartition part = induce_partition(gs);
    json parts = json::array();
    for (Index k = 0; k < part.num_parts(); ++k) {
        std::vector<Index> idx;
        for (Index j : part.parts[static_cast<std::size_t>(k)]) {
            idx.push_back(j + 1);
        }
        std::vector<std::string> names;
        for (Index h : part.membership[static_cast<std::size_t>(k)]) {
            names.push_back(gs.name(h));
        }
        parts.push_back({{"indices", idx},
                         {"weight", part.weights[static_cast<std::size_t>(k)]},
                         {"degree", part.degree[static_cast<std::size_t>(k)]},
                         {"groups", names}});
    }
    json doc = {{"p", gs.p()},
                {"groups", gs.num_groups()},
                {"parts", parts},
                {"num_parts", part.num_parts()},
                {"assumption_ratio", assumption_ratio(gs, part)},
                {"tree_structured", is_tree_structured(gs)}};
    emit(g, doc.dump(2) + "\n");
    return 0;
}

int run_norm(const Globals& g, const std::string& kind, const std::string& file, const std::string& vec)
{
    const GroupStructure gs = parse_group_file(read_text_file(file));
    const Eigen::VectorXd beta = load_vector_csv(read_text_file(vec));
    if (beta.size() != gs.p()) {
        throw Error(ErrorCode::DimensionMismatch, "vector length differs from p");
    }
    std::string out = "kind,value\n";
    for (const std::string k : {"ogl", "sep", "wlasso"}) {
        if (kind == k || kind == "all") {
            out += k + "," + format_double(evaluate(penalty_from(k, gs), beta)) + "\n";
        }
    }
    emit(g, out);
    return 0;
}

int run_prox(const Globals& g, const std::string& kind, const std::string& file, const std::string& vec,
             double lambda, double tol)
{
    const GroupStructure gs = parse_group_file(read_text_file(file));
    const Eigen::VectorXd mu = load_vector_csv(read_text_file(vec));
    if (mu.size() != gs.p()) {
        throw Error(ErrorCode::DimensionMismatch, "vector length differs from p");
    }
    ProxOptions options;
    options.tol = tol;
    Eigen::VectorXd beta;
    if (kind == "ogl") {
        const ProxResult r = prox_overlapping_bcd(mu, lambda, gs, options);
        std::cerr << "bcd: " << r.sweeps << " sweeps, residual " << r.residual
                  << (r.converged ? "" : " (sweep cap reached)") << "\n";
        if (!r.converged) {
            emit(g, write_matrix_csv(r.beta));
            return 3;
        }
        beta = r.beta;
    } else {
        beta = prox(penalty_from(kind, gs), mu, lambda, options);
    }
    emit(g, write_matrix_csv(beta));
    return 0;
}

int run_fit(const Globals& g, const DataArgs& data, const std::string& penalty, double lambda, double tol,
            int max_iter)
{
    auto [problem, gs] = data.load();
    SolveConfig cfg;
    cfg.lambda = lambda;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    const PenaltySpec pen = penalty_from(penalty, gs);
    const Solution sol = fit(problem, pen, cfg);
    std::cerr << "fit: " << sol.iterations << " iterations, objective " << sol.objective
              << (sol.converged ? "" : " (iteration cap reached)") << "\n";
    json doc = {{"penalty", pen.label()},
                {"lambda", lambda},
                {"objective", sol.objective},
                {"iterations", sol.iterations},
                {"converged", sol.converged},
                {"support_size", sol.support_size()},
                {"kkt_gap", kkt_gap(problem, sol.beta, pen, lambda)},
                {"beta", vector_json(sol.beta)}};
    emit(g, doc.dump(2) + "\n");
    return sol.converged ? 0 : 3;
}

int run_path(const Globals& g, const DataArgs& data, const std::string& penalty, double tol, int max_iter,
             int grid_size)
{
    auto [problem, gs] = data.load();
    SolveConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    const PathResult path = regularization_path(problem, penalty_from(penalty, gs), cfg, grid_size);
    std::cerr << "path: lambda in [" << path.lambda_min << ", " << path.lambda_max << "]"
              << (path.lambda_min_floored ? " (lower end floored)" : "") << ", " << path.total_time << " s\n";
    std::string out = "lambda,support_size,objective";
    for (Index j = 0; j < problem.p(); ++j) {
        out += ",beta_" + std::to_string(j + 1);
    }
    out += "\n";
    for (std::size_t i = 0; i < path.lambdas.size(); ++i) {
        const Solution& s = path.solutions[i];
        out += format_double(path.lambdas[i]) + "," + std::to_string(path.support_sizes[i]) + "," +
               format_double(s.objective);
        for (Index j = 0; j < s.beta.size(); ++j) {
            out += "," + format_double(s.beta[j]);
        }
        out += "\n";
    }
    emit(g, out);
    return 0;
}

int run_simulate(const Globals& g, const std::string& config_file, int replicate)
{
    const ExperimentConfig cfg = parse_config(read_text_file(config_file));
    const SimDesign design = prepare_design(cfg.sim);
    const SimData data = simulate_replicate(cfg.sim, design, static_cast<std::uint64_t>(replicate));
    const std::filesystem::path dir = g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out);
    std::filesystem::create_directories(dir);
    write_text_file((dir / "X.csv").string(), write_matrix_csv(data.problem.X));
    write_text_file((dir / "y.csv").string(), write_matrix_csv(data.problem.y));
    write_text_file((dir / "beta_star.csv").string(), write_matrix_csv(data.beta_star));
    write_text_file((dir / "groups.txt").string(), write_group_file(design.groups));
    std::cerr << "simulate: n=" << data.problem.n() << " p=" << data.problem.p() << " groups="
              << design.groups.num_groups() << " parts=" << design.partition.num_parts() << " -> " << dir.string()
              << "\n";
    return 0;
}

int run_bench(const Globals& g, const std::string& config_file, const std::string& json_out,
              const std::string& timings_out)
{
    ExperimentConfig cfg = parse_config(read_text_file(config_file));
    std::cerr << "bench: config " << hash_hex(config_hash(cfg)) << ", " << cfg.replicates << " replicates\n";
    const ExperimentResult result = run_experiment(cfg, [](const ResultRecord& rec) {
        std::cerr << "  replicate " << rec.replicate << " " << to_string(rec.method) << ": ";
        if (rec.ok) {
            std::cerr << "rel_error " << rec.best_rel_error << ", support " << rec.best_support_discrepancy
                      << ", " << rec.path_seconds << " s\n";
        } else {
            std::cerr << "failed: " << rec.error << "\n";
        }
    });
    emit(g, results_csv(result));
    std::string json_path = json_out;
    if (json_path.empty() && !g.out.empty()) {
        json_path = g.out + ".json";
    }
    if (!json_path.empty()) {
        write_text_file(json_path, results_json(result));
    }
    if (!timings_out.empty()) {
        write_text_file(timings_out, timings_csv(result));
    }
    if (result.failed) {
        std::cerr << "error: " << result.failure_message << "\n";
        return is_data_error(result.failure_code) ? 2 : 3;
    }
    return 0;
}

int run_check(const Globals& g, const std::string& what, int trials, bool seed_given, std::uint64_t seed)
{
    const std::uint64_t s = seed_given ? seed : g.seed;
    CheckReport report;
    if (what == "sandwich") {
        report = check_sandwich(trials, s);
    } else if (what == "dual") {
        report = check_dual(trials, s);
    } else if (what == "kkt") {
        report = check_kkt(trials, s);
    } else {
        report = check_theorem1(trials, s);
    }
    json doc = {{"check", report.name},
                {"trials", report.trials},
                {"failures", report.failures},
                {"seed", s},
                {"passed", report.passed()}};
    if (what == "theorem1-search") {
        doc["counterexamples"] = report.extra;
    } else {
        doc[what == "sandwich" ? "max_violation" : what == "dual" ? "max_excess" : "max_gap"] = report.worst;
    }
    emit(g, doc.dump(2) + "\n");
    return report.passed() ? 0 : 3;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Overlapping group lasso and its separable relaxation"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Seed for randomized commands");
    app.add_option("--threads", g.threads, "Thread count (default: SEPGL_THREADS or OpenMP default)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", g.out, "Write machine output here instead of stdout");

    std::string groupfile, vecfile, kind, config_file, json_out, timings_out, penalty = "sep", check_kind;
    double lambda = 0.0, tol = 1e-5, prox_tol = 1e-10;
    int max_iter = 20000, grid_size = 50, trials = 100, replicate = 0;
    std::uint64_t check_seed = 1;
    DataArgs data;

    auto* induce = app.add_subcommand("induce", "Induced partition, weights and assumption ratio (JSON)");
    induce->add_option("groupfile", groupfile)->required()->check(CLI::ExistingFile);

    auto* norm = app.add_subcommand("norm", "Evaluate penalty norms of a vector (CSV)");
    norm->add_option("kind", kind)->required()->check(CLI::IsMember({"ogl", "sep", "wlasso", "all"}));
    norm->add_option("groupfile", groupfile)->required()->check(CLI::ExistingFile);
    norm->add_option("vecfile", vecfile)->required()->check(CLI::ExistingFile);

    auto* proxc = app.add_subcommand("prox", "Proximal operator of a penalty (CSV column)");
    proxc->add_option("kind", kind)->required()->check(CLI::IsMember({"ogl", "sep", "wlasso"}));
    proxc->add_option("groupfile", groupfile)->required()->check(CLI::ExistingFile);
    proxc->add_option("vecfile", vecfile)->required()->check(CLI::ExistingFile);
    proxc->add_option("--lambda", lambda)->required()->check(CLI::NonNegativeNumber);
    proxc->add_option("--tol", prox_tol, "BCD tolerance");

    auto* fitc = app.add_subcommand("fit", "Solve at one lambda (JSON)");
    data.attach(fitc);
    fitc->add_option("--penalty", penalty)->check(CLI::IsMember({"ogl", "sep", "wlasso"}));
    fitc->add_option("--lambda", lambda)->required()->check(CLI::NonNegativeNumber);
    fitc->add_option("--tol", tol);
    fitc->add_option("--max-iter", max_iter)->check(CLI::PositiveNumber);

    auto* pathc = app.add_subcommand("path", "Regularization path with line-searched endpoints (CSV)");
    data.attach(pathc);
    pathc->add_option("--penalty", penalty)->check(CLI::IsMember({"ogl", "sep", "wlasso"}));
    pathc->add_option("--tol", tol);
    pathc->add_option("--max-iter", max_iter)->check(CLI::PositiveNumber);
    pathc->add_option("--grid-size", grid_size)->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("simulate", "Write one simulated replicate to the --out directory");
    sim->add_option("configfile", config_file)->required()->check(CLI::ExistingFile);
    sim->add_option("--replicate", replicate)->check(CLI::NonNegativeNumber);

    auto* bench = app.add_subcommand("bench", "Run an experiment config (results CSV)");
    bench->add_option("configfile", config_file)->required()->check(CLI::ExistingFile);
    bench->add_option("--json", json_out, "JSON report (default: <out>.json when --out is set)");
    bench->add_option("--timings", timings_out, "Timing CSV");

    auto* check = app.add_subcommand("check", "Randomized self-checks (JSON)");
    check->add_option("what", check_kind)
        ->required()
        ->check(CLI::IsMember({"sandwich", "dual", "kkt", "theorem1-search"}));
    check->add_option("--trials", trials)->check(CLI::PositiveNumber);
    auto* check_seed_opt = check->add_option("--seed", check_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    int threads = g.threads;
    if (threads == 0) {
        if (const char* env = std::getenv("SEPGL_THREADS")) {
            threads = std::atoi(env);
        }
    }
    kernels::set_threads(threads);

    try {
        if (*induce) return run_induce(g, groupfile);
        if (*norm) return run_norm(g, kind, groupfile, vecfile);
        if (*proxc) return run_prox(g, kind, groupfile, vecfile, lambda, prox_tol);
        if (*fitc) return run_fit(g, data, penalty, lambda, tol, max_iter);
        if (*pathc) return run_path(g, data, penalty, tol, max_iter, grid_size);
        if (*sim) return run_simulate(g, config_file, replicate);
        if (*bench) return run_bench(g, config_file, json_out, timings_out);
        if (*check) return run_check(g, check_kind, trials, check_seed_opt->count() > 0, check_seed);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_data_error(e.code()) ? 2 : 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
