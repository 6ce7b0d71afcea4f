// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sepgl/checks.hpp"
#include "sepgl/error.hpp"
#include "sepgl/experiment.hpp"
#include "sepgl/io.hpp"
#include "sepgl/path.hpp"
#include "sepgl/prox.hpp"
#include "sepgl/simgen.hpp"
#include "sepgl/solver.hpp"
#include "test_util.hpp"

using namespace sepgl;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b)
{
    char buf[192];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig shipped(const std::string& name)
{
    return parse_config(read_text_file(std::string(SEPGL_SOURCE_DIR) + "/configs/" + name));
}

double method_mean(const ExperimentResult& r, Method m, double ResultRecord::*field)
{
    double s = 0.0;
    int k = 0;
    for (const auto& rec : r.records) {
        if (rec.method == m && rec.ok) {
            s += rec.*field;
            ++k;
        }
    }
    return k ? s / k : std::nan("");
}

Outcome partition_counts()
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    for (Index m : {1, 2, 3, 7, 50, 400}) {
        for (Index d : {5, 10, 40}) {
            const Index o = std::llround(0.2 * static_cast<double>(d));
            const auto gs = interlocking_groups(m, d, 0.2);
            const auto part = induce_partition(gs);
            std::vector<Index> expect;
            if (m == 1) {
                expect = {d};
            } else {
                expect.push_back(d - o);
                for (Index g = 1; g < m - 1; ++g) {
                    expect.push_back(o);
                    expect.push_back(d - 2 * o);
                }
                expect.push_back(o);
                expect.push_back(d - o);
            }
            std::vector<Index> sizes;
            for (const auto& s : part.parts) {
                sizes.push_back(static_cast<Index>(s.size()));
            }
            ok = ok && part.num_parts() == 2 * m - 1 && sizes == expect;
        }
    }
    const Index p = interlocking_groups(400, 40).p();
    const double secs = seconds_since(t0);
    ok = ok && p == 12808 && secs < 1.0;
    return {ok, "p(400,40)=" + std::to_string(p) + fmt(", %.3f s", secs)};
}

Outcome sandwich_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    int violations = 0;
    int single = 0;
    int single_bad = 0;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        CounterRng rng(1001, s);
        const Index p = 1 + static_cast<Index>(rng() % 30);
        const Index m = 1 + static_cast<Index>(rng() % 8);
        const auto gs = random_structure(p, m, rng);
        const auto part = induce_partition(gs);
        for (int b = 0; b < 20; ++b) {
            const Eigen::VectorXd beta = random_beta(part, b, rng);
            const auto r = sandwich_check(gs, part, beta);
            const double scale = std::max(r.wlasso, 1e-300);
            const double excess = std::max(r.phi - r.psi, r.psi - r.wlasso) / scale;
            worst = std::max(worst, excess);
            violations += excess > 1e-12 ? 1 : 0;
            if (r.single_part) {
                ++single;
                single_bad += std::abs(r.phi - r.psi) > 1e-12 * std::max(r.psi, 1e-300) ? 1 : 0;
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = violations == 0 && single_bad == 0 && single > 0 && secs < 10.0;
    return {ok, "1000 pairs, violations=" + std::to_string(violations) + fmt(" (worst %.2e)", worst) +
                    ", single-part " + std::to_string(single) + " mismatches=" + std::to_string(single_bad) +
                    fmt(", %.2f s", secs)};
}

Outcome prox_oracle()
{
    const auto t0 = std::chrono::steady_clock::now();
    double worst_gap = -1e300;
    for (std::uint64_t s = 0; s < 20; ++s) {
        CounterRng rng(2002, s);
        const Index p = 2 + static_cast<Index>(rng() % 3);
        const Index m = 2 + static_cast<Index>(rng() % 2);
        const auto gs = random_structure(p, m, rng);
        const Eigen::VectorXd mu = test::normal_vector(p, rng);
        const double lambda = 0.2 + 0.6 * std::uniform_real_distribution<double>()(rng);
        ProxOptions opt;
        opt.tol = 1e-12;
        const auto r = prox_overlapping_bcd(mu, lambda, gs, opt);
        const double bcd = test::prox_objective(mu, r.beta, lambda, gs);
        worst_gap = std::max(worst_gap, bcd - test::grid_prox_minimum(mu, lambda, gs));
    }
    double worst_disjoint = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        CounterRng rng(2003, s);
        const GroupStructure gs(7, {{0, 1, 2}, {3, 4}, {5, 6}}, {1.0, 0.5 + s * 0.1, 2.0});
        const Eigen::VectorXd mu = test::normal_vector(7, rng, 2.0);
        const auto r = prox_overlapping_bcd(mu, 0.7, gs);
        const auto closed = prox_separable(mu, 0.7, induce_partition(gs));
        worst_disjoint = std::max(worst_disjoint, (r.beta - closed).cwiseAbs().maxCoeff());
    }
    const double secs = seconds_since(t0);
    const bool ok = worst_gap <= 1e-5 && worst_disjoint <= 1e-10 && secs < 30.0;
    return {ok, fmt("max(bcd - grid)=%.2e, disjoint max diff=%.2e", worst_gap, worst_disjoint) +
                    fmt(", %.2f s", secs)};
}

Outcome prox_certificates()
{
    int runs = 0;
    int converged = 0;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        CounterRng rng(3003, s);
        const Index p = 2 + static_cast<Index>(rng() % 29);
        const Index m = 1 + static_cast<Index>(rng() % 8);
        const auto gs = random_structure(p, m, rng);
        const Eigen::VectorXd mu = test::normal_vector(p, rng, 2.0);
        const double lambda = 0.05 + std::uniform_real_distribution<double>()(rng);
        const auto r = prox_overlapping_bcd(mu, lambda, gs);
        ++runs;
        if (!r.converged) {
            continue;
        }
        ++converged;
        const auto c = prox_certificate(r, mu, lambda, gs);
        worst = std::max({worst, c.dual_infeasibility, c.linking, c.alignment});
    }
    return {worst <= 1e-8 && converged > 0, std::to_string(converged) + "/" + std::to_string(runs) +
                                                " converged" + fmt(", worst residual %.2e", worst)};
}

Outcome solver_oracles()
{
    double ortho = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        CounterRng rng(4004, s);
        const Index n = 40, p = 6;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(test::normal_matrix(n, p, rng));
        const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
        Problem pr;
        pr.X = std::sqrt(static_cast<double>(n)) * Q;
        pr.y = pr.X * test::normal_vector(p, rng) + test::normal_vector(n, rng);
        const Eigen::VectorXd c = test::normal_vector(p, rng).cwiseAbs().array() + 0.5;
        const Eigen::VectorXd z = pr.X.transpose() * pr.y / static_cast<double>(n);
        SolveConfig cfg;
        cfg.lambda = 0.2;
        cfg.tol = 1e-16;
        cfg.max_iter = 100000;
        const Solution sol = fit(pr, PenaltySpec::weighted_lasso(c), cfg);
        for (Index j = 0; j < p; ++j) {
            const double t = cfg.lambda * c[j];
            const double soft = std::copysign(std::max(std::abs(z[j]) - t, 0.0), z[j]);
            ortho = std::max(ortho, std::abs(sol.beta[j] - soft));
        }
    }

    double disjoint = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        CounterRng rng(4005, s);
        Problem pr;
        pr.X = test::normal_matrix(50, 7, rng);
        pr.y = pr.X * test::normal_vector(7, rng) + test::normal_vector(50, rng);
        const GroupStructure gs(7, {{0, 1, 2}, {3}, {4, 5, 6}}, {1.0, 0.7, 2.0});
        SolveConfig cfg;
        cfg.lambda = 0.1;
        cfg.tol = 1e-14;
        cfg.max_iter = 100000;
        const auto a = fit(pr, PenaltySpec::overlapping(gs), cfg);
        const auto b = fit(pr, PenaltySpec::separable(induce_partition(gs)), cfg);
        disjoint = std::max(disjoint, (a.beta - b.beta).cwiseAbs().maxCoeff());
    }

    double fd = 0.0;
    for (Loss loss : {Loss::Squared, Loss::Logistic}) {
        for (std::uint64_t s = 0; s < 10; ++s) {
            CounterRng rng(4006 + static_cast<std::uint64_t>(loss), s);
            Problem pr;
            pr.loss = loss;
            pr.X = test::normal_matrix(30, 6, rng);
            pr.y = pr.X * test::normal_vector(6, rng) + test::normal_vector(30, rng);
            if (loss == Loss::Logistic) {
                pr.y = (pr.y.array() > 0.0).cast<double>();
            }
            const Eigen::VectorXd b = test::normal_vector(6, rng, 0.5);
            const Eigen::VectorXd g = grad_loss(pr, b);
            const double h = 1e-6;
            for (Index j = 0; j < 6; ++j) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(6);
                e[j] = h;
                const double num = (loss_value(pr, b + e) - loss_value(pr, b - e)) / (2 * h);
                fd = std::max(fd, std::abs(num - g[j]) / std::max(1.0, std::abs(g[j])));
            }
        }
    }
    return {ortho <= 1e-8 && disjoint <= 1e-6 && fd <= 1e-6,
            fmt("orthogonal %.2e, disjoint %.2e", ortho, disjoint) + fmt(", finite-difference %.2e", fd)};
}

Outcome lambda_max_bracket()
{
    int bracketed = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        CounterRng rng(5005, s);
        Problem pr;
        pr.X = test::normal_matrix(60, 8, rng);
        pr.y = pr.X * test::normal_vector(8, rng) + test::normal_vector(60, rng);
        const Eigen::VectorXd c = test::normal_vector(8, rng).cwiseAbs().array() + 0.5;
        const double lam = find_lambda_max(pr, PenaltySpec::weighted_lasso(c));
        const double threshold = (pr.X.transpose() * pr.y / 60.0).cwiseAbs().cwiseQuotient(c).maxCoeff();
        bracketed += (threshold > 0.9 * lam && threshold <= lam) ? 1 : 0;
    }
    return {bracketed == 10, std::to_string(bracketed) + "/10 instances bracketed"};
}

Outcome covariance_floor()
{
    double worst_eig = 1e300;
    double worst_asym = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        CounterRng rng(10010, s);
        const Index p = 2 + static_cast<Index>(rng() % 39);
        const Index m = 1 + static_cast<Index>(rng() % 10);
        const auto gs = random_structure(p, m, rng);
        const auto theta = build_covariance(gs, induce_partition(gs));
        worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(theta).eigenvalues().minCoeff());
        worst_asym = std::max(worst_asym, (theta - theta.transpose()).cwiseAbs().maxCoeff());
    }
    return {worst_eig >= 0.1 - 1e-9 && worst_asym <= 1e-12,
            fmt("min eigenvalue %.12f, asymmetry %.2e", worst_eig, worst_asym)};
}

Outcome dual_dominance()
{
    const CheckReport dom = check_dual(500, 11011);
    double worst_sharp = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        CounterRng rng(11012, s);
        const Index p = 2 + static_cast<Index>(rng() % 8);
        const Index m = 1 + static_cast<Index>(rng() % 4);
        const auto base = random_structure(p, m, rng);
        // Append a group of fresh degree-one variables that carries the largest ratio.
        const Index k = 1 + static_cast<Index>(rng() % 3);
        std::vector<IndexSet> groups;
        std::vector<double> weights;
        for (Index g = 0; g < base.num_groups(); ++g) {
            groups.push_back(base.group(g));
            weights.push_back(base.weight(g));
        }
        IndexSet fresh;
        for (Index j = 0; j < k; ++j) {
            fresh.push_back(p + j);
        }
        groups.push_back(fresh);
        weights.push_back(0.5 + std::uniform_real_distribution<double>()(rng));
        const GroupStructure gs(p + k, groups, weights);
        Eigen::VectorXd v = test::normal_vector(p + k, rng, 0.1);
        for (Index j = p; j < p + k; ++j) {
            v[j] = (j % 2 ? -1.0 : 1.0) * (5.0 + static_cast<double>(j));
        }
        const double bound = dual_upper_bound(v, gs);
        const double est = dual_estimate(v, PenaltySpec::overlapping(gs));
        worst_sharp = std::max(worst_sharp, std::abs(bound - est));
    }
    return {dom.passed() && worst_sharp <= 1e-6,
            std::to_string(dom.trials) + " pairs, " + std::to_string(dom.failures) + " above bound" +
                fmt(" (max excess %.2e), sharp instances max |bound - estimate| %.2e", dom.worst, worst_sharp)};
}

Outcome theorem1_search()
{
    const CheckReport r = check_theorem1(10, 12012);
    return {r.passed() && r.extra == 0,
            std::to_string(r.trials) + " searches, " + std::to_string(r.extra) + " counterexamples"};
}

Outcome reproducible_bench()
{
    const ExperimentConfig c = shipped("smoke.cfg");
    const std::string a = results_csv(run_experiment(c));
    const std::string b = results_csv(run_experiment(c));
    return {a == b && !a.empty(), std::to_string(a.size()) + " bytes, identical=" + (a == b ? "yes" : "no")};
}

} // namespace

int main()
{
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            out = fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failures += out.pass ? 0 : 1;
        std::printf("%s %2d %-28s %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    };

    report(1, "partition-correctness", partition_counts);
    report(2, "sandwich-suite", sandwich_suite);
    report(3, "prox-oracle", prox_oracle);
    report(4, "prox-certificate", prox_certificates);
    report(5, "solver-oracles", solver_oracles);
    report(6, "lambda-max-bracket", lambda_max_bracket);

    report(7, "interlocking-equivalence", [&] {
        const ExperimentResult interlocking = run_experiment(shipped("interlocking.cfg"));
        const double ogl = method_mean(interlocking, Method::Ogl, &ResultRecord::best_rel_error);
        const double sep = method_mean(interlocking, Method::Sep, &ResultRecord::best_rel_error);
        const double wl = method_mean(interlocking, Method::WLasso, &ResultRecord::best_rel_error);
        const double ogl_s = method_mean(interlocking, Method::Ogl, &ResultRecord::best_support_discrepancy);
        const double sep_s = method_mean(interlocking, Method::Sep, &ResultRecord::best_support_discrepancy);
        const bool close = std::abs(sep - ogl) <= 0.05;
        const bool wl_worse = wl >= std::max(ogl, sep) + 0.03;
        const bool support = std::abs(sep_s - ogl_s) <= 0.01;
        Outcome o;
        o.pass = !interlocking.failed && close && wl_worse && support;
        o.detail = fmt("rel error ogl %.4f sep %.4f", ogl, sep) + fmt(" wlasso %.4f (margin %.4f)", wl,
                                                                        wl - std::max(ogl, sep)) +
                   fmt(", support ogl %.4f sep %.4f", ogl_s, sep_s) + " [equiv " + (close ? "ok" : "no") +
                   ", wlasso+0.03 " + (wl_worse ? "ok" : "no") + ", support " + (support ? "ok" : "no") + "]";
        return o;
    });

    report(8, "path-speed", [&] {
        ExperimentConfig c = shipped("interlocking.cfg");
        c.replicates = 1;
        c.methods = {Method::Ogl, Method::Sep};
        const ExperimentResult r = run_experiment(c);
        const double ogl = r.records.at(0).path_seconds;
        const double sep = r.records.at(1).path_seconds;
        return Outcome{!r.failed && sep <= 0.5 * ogl,
                       fmt("ogl %.3f s, sep %.3f s", ogl, sep) + fmt(" (ratio %.2f)", ogl / sep)};
    });

    report(9, "nested-equivalence", [&] {
        const ExperimentResult r = run_experiment(shipped("nested.cfg"));
        const double ogl = method_mean(r, Method::Ogl, &ResultRecord::best_rel_error);
        const double sep = method_mean(r, Method::Sep, &ResultRecord::best_rel_error);
        const double uni = method_mean(r, Method::SepUniform, &ResultRecord::best_rel_error);
        const double size = method_mean(r, Method::SepSize, &ResultRecord::best_rel_error);
        const double d = std::abs(sep - ogl);
        const bool ok = !r.failed && d <= 0.05 && std::abs(uni - ogl) > d && std::abs(size - ogl) > d;
        return Outcome{ok, fmt("rel error ogl %.4f sep %.4f", ogl, sep) +
                               fmt(" uniform %.4f size %.4f", uni, size)};
    });

    report(10, "covariance-floor", covariance_floor);
    report(11, "dual-bound-dominance", dual_dominance);
    report(12, "theorem1-search", theorem1_search);
    report(13, "bench-reproducible", reproducible_bench);

    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
