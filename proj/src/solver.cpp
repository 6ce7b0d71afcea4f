#include "sepgl/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "sepgl/kernels.hpp"
#include "sepgl/rng.hpp"

namespace sepgl {

namespace {

double softplus(double x)
{
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x)
{
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double loss_from_linear(const Problem& problem, const Eigen::VectorXd& eta)
{
    const double n = static_cast<double>(problem.n());
    if (problem.loss == Loss::Squared) {
        return 0.5 * (problem.y - eta).squaredNorm() / n;
    }
    double acc = 0.0;
    for (Index i = 0; i < eta.size(); ++i) {
        acc += softplus(eta[i]) - problem.y[i] * eta[i];
    }
    return acc / n;
}

void grad_from_linear(const Problem& problem, const Eigen::VectorXd& eta, Eigen::VectorXd& work,
                      Eigen::VectorXd& grad)
{
    work.resize(eta.size());
    if (problem.loss == Loss::Squared) {
        work = eta - problem.y;
    } else {
        for (Index i = 0; i < eta.size(); ++i) {
            work[i] = sigmoid(eta[i]) - problem.y[i];
        }
    }
    kernels::gemv_t(problem.X, work, grad);
    grad /= static_cast<double>(problem.n());
}

void check_beta(const Problem& problem, const Eigen::VectorXd& beta)
{
    if (beta.size() != problem.p()) {
        throw Error(ErrorCode::DimensionMismatch, "coefficient vector has length " + std::to_string(beta.size()) +
                                                      ", design has " + std::to_string(problem.p()) + " columns");
    }
}

// Proximal step for the penalty, keeping BCD state between calls.
class ProxStepper {
public:
    ProxStepper(const PenaltySpec& penalty, const SolveConfig& config) : penalty_(penalty), config_(config)
    {
        options_.tol = config.prox_tol;
        options_.max_sweeps = config.prox_max_sweeps;
        if (const auto* ogl = std::get_if<OverlappingGroupLasso>(&penalty.kind)) {
            plan_ = make_bcd_plan(ogl->groups, SweepOrder::Auto);
        }
    }

    Eigen::VectorXd operator()(const Eigen::VectorXd& mu, double lambda)
    {
        if (const auto* ogl = std::get_if<OverlappingGroupLasso>(&penalty_.kind)) {
            const bool warm = config_.warm_start_duals && !duals_.empty();
            ProxResult r = prox_overlapping_bcd(mu, lambda, ogl->groups, plan_, options_, warm ? &duals_ : nullptr);
            sweeps += r.sweeps;
            if (!r.converged) {
                ++unconverged;
            }
            if (config_.warm_start_duals) {
                duals_ = std::move(r.duals);
            }
            return std::move(r.beta);
        }
        return prox(penalty_, mu, lambda, options_);
    }

    long sweeps = 0;
    int unconverged = 0;

private:
    const PenaltySpec& penalty_;
    const SolveConfig& config_;
    ProxOptions options_;
    BcdPlan plan_;
    std::vector<Eigen::VectorXd> duals_;
};

} // namespace

void validate(const Problem& problem)
{
    if (problem.n() < 1 || problem.p() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "design matrix must be at least 1 x 1");
    }
    if (problem.y.size() != problem.n()) {
        throw Error(ErrorCode::DimensionMismatch, "response has length " + std::to_string(problem.y.size()) +
                                                      ", design has " + std::to_string(problem.n()) + " rows");
    }
    if (!problem.X.allFinite() || !problem.y.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "design and response must be finite");
    }
    if (problem.loss == Loss::Logistic) {
        for (Index i = 0; i < problem.y.size(); ++i) {
            if (problem.y[i] != 0.0 && problem.y[i] != 1.0) {
                throw Error(ErrorCode::InvalidArgument, "logistic response must be 0 or 1");
            }
        }
    }
}

Index Solution::support_size() const
{
    Index count = 0;
    for (Index j = 0; j < beta.size(); ++j) {
        count += beta[j] != 0.0 ? 1 : 0;
    }
    return count;
}

double loss_value(const Problem& problem, const Eigen::VectorXd& beta)
{
    check_beta(problem, beta);
    Eigen::VectorXd eta;
    kernels::gemv(problem.X, beta, eta);
    return loss_from_linear(problem, eta);
}

double objective(const Problem& problem, const Eigen::VectorXd& beta, const PenaltySpec& penalty, double lambda)
{
    check_beta(problem, beta);
    return loss_value(problem, beta) + lambda * penalty.scale * evaluate(penalty, beta);
}

Eigen::VectorXd grad_loss(const Problem& problem, const Eigen::VectorXd& beta)
{
    check_beta(problem, beta);
    Eigen::VectorXd eta;
    Eigen::VectorXd work;
    Eigen::VectorXd grad;
    kernels::gemv(problem.X, beta, eta);
    grad_from_linear(problem, eta, work, grad);
    return grad;
}

double spectral_norm_sq_over_n(const Eigen::MatrixXd& X, int max_iter, double rel_tol)
{
    CounterRng rng(0x5eed, 0);
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(X.cols());
    for (Index j = 0; j < v.size(); ++j) {
        v[j] = normal(rng);
    }
    v.normalize();
    Eigen::VectorXd Xv;
    Eigen::VectorXd w;
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        kernels::gemv(X, v, Xv);
        kernels::gemv_t(X, Xv, w);
        const double next = w.norm() / static_cast<double>(X.rows());
        if (next == 0.0) {
            return 0.0;
        }
        v = w / w.norm();
        const bool done = std::abs(next - estimate) <= rel_tol * next;
        estimate = next;
        if (done) {
            break;
        }
    }
    return estimate;
}

double lipschitz_constant(const Problem& problem)
{
    const double s = spectral_norm_sq_over_n(problem.X);
    return problem.loss == Loss::Logistic ? s / 4.0 : s;
}

Solution fit(const Problem& problem, const PenaltySpec& penalty, const SolveConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    validate(problem);
    if (penalty.dimension() != problem.p()) {
        throw Error(ErrorCode::DimensionMismatch, "penalty dimension does not match design columns");
    }
    if (config.lambda < 0.0 || std::isnan(config.lambda)) {
        throw Error(ErrorCode::NegativeLambda, "lambda must be nonnegative");
    }
    if (!(config.tol > 0.0) || config.max_iter < 1 || !(config.backtrack_factor > 0.0 && config.backtrack_factor < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "invalid solver configuration");
    }
    const double lambda = config.lambda * penalty.scale;
    const double n = static_cast<double>(problem.n());

    double L = 0.0;
    if (config.lipschitz) {
        L = *config.lipschitz;
    } else if (config.step == StepRule::PowerIterationLipschitz) {
        L = lipschitz_constant(problem);
    } else {
        // Largest column norm is a lower bound; backtracking grows it as needed.
        L = problem.X.colwise().squaredNorm().maxCoeff() / n;
        if (problem.loss == Loss::Logistic) {
            L /= 4.0;
        }
    }
    if (!(L > 0.0) || !std::isfinite(L)) {
        L = 1.0;
    }

    Solution sol;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.p());
    if (config.warm_start) {
        check_beta(problem, *config.warm_start);
        x = *config.warm_start;
    }
    Eigen::VectorXd eta_x;
    kernels::gemv(problem.X, x, eta_x);
    double f_x = loss_from_linear(problem, eta_x) + lambda * evaluate(penalty, x);
    if (!std::isfinite(f_x)) {
        throw Error(ErrorCode::NonFiniteObjective, "objective at the starting point is not finite");
    }
    sol.objective_trace.push_back(f_x);

    Eigen::VectorXd x_prev = x;
    Eigen::VectorXd eta_prev = eta_x;
    Eigen::VectorXd z;
    Eigen::VectorXd eta_z;
    Eigen::VectorXd grad;
    Eigen::VectorXd work;
    Eigen::VectorXd eta_new;
    ProxStepper step(penalty, config);
    double t = 1.0;
    double momentum = 0.0;

    for (int it = 1; it <= config.max_iter; ++it) {
        sol.iterations = it;
        z = x + momentum * (x - x_prev);
        eta_z = eta_x + momentum * (eta_x - eta_prev);
        grad_from_linear(problem, eta_z, work, grad);
        const double f_z = loss_from_linear(problem, eta_z);

        Eigen::VectorXd x_new;
        double loss_new = 0.0;
        for (int bt = 0;; ++bt) {
            x_new = step(z - grad / L, lambda / L);
            kernels::gemv(problem.X, x_new, eta_new);
            loss_new = loss_from_linear(problem, eta_new);
            const Eigen::VectorXd d = x_new - z;
            const double model = f_z + grad.dot(d) + 0.5 * L * d.squaredNorm();
            if (loss_new <= model + 1e-12 * std::abs(f_z)) {
                break;
            }
            if (bt >= 60) {
                throw Error(ErrorCode::StepSizeFailure, "backtracking did not find a valid step");
            }
            L /= config.backtrack_factor;
        }
        const double f_new = loss_new + lambda * evaluate(penalty, x_new);
        if (!std::isfinite(f_new)) {
            throw Error(ErrorCode::NonFiniteObjective, "objective became non-finite at iteration " + std::to_string(it));
        }

        if (f_new > f_x) {
            if (momentum == 0.0) {
                // A plain proximal step cannot increase the objective beyond roundoff.
                if (f_new - f_x <= config.tol) {
                    sol.converged = true;
                    break;
                }
                L /= config.backtrack_factor;
                continue;
            }
            t = 1.0;
            momentum = 0.0;
            x_prev = x;
            eta_prev = eta_x;
            continue;
        }

        const bool plain_step = momentum == 0.0;
        x_prev.swap(x);
        x.swap(x_new);
        eta_prev.swap(eta_x);
        eta_x.swap(eta_new);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        momentum = (t - 1.0) / t_next;
        t = t_next;

        const double change = f_x - f_new;
        f_x = f_new;
        sol.objective_trace.push_back(f_x);
        if (change <= config.tol) {
            if (plain_step) {
                sol.converged = true;
                break;
            }
            // A small accelerated step can stall short of the optimum; confirm with a plain step.
            t = 1.0;
            momentum = 0.0;
            x_prev = x;
            eta_prev = eta_x;
        }
    }

    sol.beta = std::move(x);
    sol.objective = f_x;
    sol.lipschitz = L;
    sol.prox_sweeps_total = step.sweeps;
    sol.prox_unconverged = step.unconverged;
    sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

double kkt_gap(const Problem& problem, const Eigen::VectorXd& beta, const PenaltySpec& penalty, double lambda)
{
    validate(problem);
    const Eigen::VectorXd g = grad_loss(problem, beta);
    const double lam = lambda * penalty.scale;

    auto block_residual = [&](const IndexSet& block, double weight) {
        double bnorm2 = 0.0;
        double gnorm2 = 0.0;
        for (Index j : block) {
            bnorm2 += beta[j] * beta[j];
            gnorm2 += g[j] * g[j];
        }
        if (bnorm2 == 0.0) {
            return std::max(0.0, std::sqrt(gnorm2) - lam * weight);
        }
        const double bnorm = std::sqrt(bnorm2);
        double acc = 0.0;
        for (Index j : block) {
            const double r = g[j] + lam * weight * beta[j] / bnorm;
            acc += r * r;
        }
        return std::sqrt(acc);
    };

    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, WeightedLasso>) {
                double gap = 0.0;
                for (Index j = 0; j < beta.size(); ++j) {
                    gap = std::max(gap, block_residual({j}, k.weights[j]));
                }
                return gap;
            } else if constexpr (std::is_same_v<T, SeparableGroupLasso>) {
                double gap = 0.0;
                for (std::size_t b = 0; b < k.partition.parts.size(); ++b) {
                    gap = std::max(gap, block_residual(k.partition.parts[b], k.partition.weights[b]));
                }
                return gap;
            } else if constexpr (std::is_same_v<T, OverlappingGroupLasso>) {
                const GroupStructure& gs = k.groups;
                const Index p = gs.p();
                Eigen::VectorXd subgrad = Eigen::VectorXd::Zero(p);
                std::vector<Index> zero_degree(static_cast<std::size_t>(p), 0);
                std::vector<char> zero_group(static_cast<std::size_t>(gs.num_groups()), 0);
                for (Index grp = 0; grp < gs.num_groups(); ++grp) {
                    double bnorm2 = 0.0;
                    for (Index j : gs.group(grp)) {
                        bnorm2 += beta[j] * beta[j];
                    }
                    if (bnorm2 == 0.0) {
                        zero_group[static_cast<std::size_t>(grp)] = 1;
                        for (Index j : gs.group(grp)) {
                            ++zero_degree[static_cast<std::size_t>(j)];
                        }
                        continue;
                    }
                    const double bnorm = std::sqrt(bnorm2);
                    for (Index j : gs.group(grp)) {
                        subgrad[j] += lam * gs.weight(grp) * beta[j] / bnorm;
                    }
                }
                // Coordinates outside every all-zero group must be stationary.
                double gap = 0.0;
                for (Index j = 0; j < p; ++j) {
                    if (zero_degree[static_cast<std::size_t>(j)] == 0) {
                        gap = std::max(gap, std::abs(g[j] + subgrad[j]));
                    }
                }
                // The rest must be absorbed by the all-zero groups' dual balls;
                // checked with the dual upper bound over those groups.
                double bound = 0.0;
                for (Index grp = 0; grp < gs.num_groups(); ++grp) {
                    if (!zero_group[static_cast<std::size_t>(grp)]) {
                        continue;
                    }
                    double acc = 0.0;
                    for (Index j : gs.group(grp)) {
                        const double hv = g[j] / static_cast<double>(zero_degree[static_cast<std::size_t>(j)]);
                        acc += hv * hv;
                    }
                    bound = std::max(bound, std::sqrt(acc) / gs.weight(grp));
                }
                return std::max(gap, bound - lam);
            } else {
                throw Error(ErrorCode::UnsupportedPenalty, "kkt_gap is not available for general lq penalties");
            }
        },
        penalty.kind);
}

} // namespace sepgl
