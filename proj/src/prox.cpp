#include "sepgl/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sepgl {

namespace {

void check_lambda(double lambda)
{
    if (lambda < 0.0 || std::isnan(lambda)) {
        throw Error(ErrorCode::NegativeLambda, "lambda must be nonnegative, got " + std::to_string(lambda));
    }
}

void check_dim(const Eigen::VectorXd& mu, Index p)
{
    if (mu.size() != p) {
        throw Error(ErrorCode::DimensionMismatch,
                    "prox input has length " + std::to_string(mu.size()) + ", expected " + std::to_string(p));
    }
}

void shrink_block(const Eigen::VectorXd& mu, const IndexSet& block, double threshold, Eigen::VectorXd& out)
{
    double acc = 0.0;
    for (Index j : block) {
        acc += mu[j] * mu[j];
    }
    const double norm = std::sqrt(acc);
    if (norm <= threshold) {
        for (Index j : block) {
            out[j] = 0.0;
        }
        return;
    }
    const double factor = 1.0 - threshold / norm;
    for (Index j : block) {
        out[j] = factor * mu[j];
    }
}

/// Primal block from the duals, with exact zeros on blocks inside their dual ball.
void recover_primal(const Eigen::VectorXd& mu, const GroupStructure& gs, double tol, const std::vector<char>& zeroed,
                    ProxResult& result)
{
    const Index m = gs.num_groups();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(gs.p());
    for (Index g = 0; g < m; ++g) {
        const auto& members = gs.group(g);
        const auto& xi = result.duals[static_cast<std::size_t>(g)];
        for (std::size_t i = 0; i < members.size(); ++i) {
            sum[members[i]] += xi[static_cast<Index>(i)];
        }
    }
    result.beta = mu - sum;
    for (Index g = 0; g < m; ++g) {
        if (zeroed[static_cast<std::size_t>(g)]) {
            for (Index j : gs.group(g)) {
                result.beta[j] = 0.0;
            }
        }
    }
    // A block that tends to zero while its dual sits on the sphere converges
    // slowly and stops at a tiny nonzero value with no meaningful direction.
    // Below 10 * tol it is moved into the dual block, which keeps the linking
    // identity exact and exceeds the dual radius by at most 10 * tol.
    const double snap = 10.0 * tol;
    for (Index g = 0; g < m; ++g) {
        if (zeroed[static_cast<std::size_t>(g)]) {
            continue;
        }
        const auto& members = gs.group(g);
        double bnorm2 = 0.0;
        for (Index j : members) {
            bnorm2 += result.beta[j] * result.beta[j];
        }
        if (bnorm2 == 0.0 || std::sqrt(bnorm2) > snap) {
            continue;
        }
        auto& xi = result.duals[static_cast<std::size_t>(g)];
        for (std::size_t i = 0; i < members.size(); ++i) {
            xi[static_cast<Index>(i)] += result.beta[members[i]];
            result.beta[members[i]] = 0.0;
        }
    }
}

double max_alignment(const ProxResult& result, double lambda, const GroupStructure& gs)
{
    double worst = 0.0;
    for (Index g = 0; g < gs.num_groups(); ++g) {
        const auto& members = gs.group(g);
        double bnorm2 = 0.0;
        for (Index j : members) {
            bnorm2 += result.beta[j] * result.beta[j];
        }
        if (bnorm2 == 0.0) {
            continue;
        }
        const double scale = lambda * gs.weight(g) / std::sqrt(bnorm2);
        const auto& xi = result.duals[static_cast<std::size_t>(g)];
        double acc = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            const double diff = xi[static_cast<Index>(i)] - scale * result.beta[members[i]];
            acc += diff * diff;
        }
        worst = std::max(worst, std::sqrt(acc));
    }
    return worst;
}

} // namespace

Eigen::VectorXd prox_separable(const Eigen::VectorXd& mu, double lambda, const InducedPartition& part)
{
    check_lambda(lambda);
    check_dim(mu, part.p);
    Eigen::VectorXd out = mu;
    if (lambda == 0.0) {
        return out;
    }
    for (std::size_t k = 0; k < part.parts.size(); ++k) {
        shrink_block(mu, part.parts[k], lambda * part.weights[k], out);
    }
    return out;
}

Eigen::VectorXd prox_soft_threshold(const Eigen::VectorXd& mu, double lambda, const Eigen::VectorXd& c)
{
    check_lambda(lambda);
    check_dim(mu, c.size());
    Eigen::VectorXd out(mu.size());
    for (Index j = 0; j < mu.size(); ++j) {
        const double mag = std::abs(mu[j]) - lambda * c[j];
        out[j] = mag > 0.0 ? std::copysign(mag, mu[j]) : 0.0;
    }
    return out;
}

BcdPlan make_bcd_plan(const GroupStructure& gs, SweepOrder order)
{
    BcdPlan plan;
    plan.order.resize(static_cast<std::size_t>(gs.num_groups()));
    std::iota(plan.order.begin(), plan.order.end(), Index{0});

    bool tree = false;
    if (order == SweepOrder::Tree) {
        if (!is_tree_structured(gs)) {
            throw Error(ErrorCode::InvalidArgument, "tree sweep order requested for non-tree groups");
        }
        tree = true;
    } else if (order == SweepOrder::Auto) {
        tree = is_tree_structured(gs);
    }
    if (tree) {
        // In a laminar family a strict subset is strictly smaller, so sorting
        // by size puts every group before the groups containing it.
        std::stable_sort(plan.order.begin(), plan.order.end(),
                         [&](Index a, Index b) { return gs.group_size(a) < gs.group_size(b); });
        plan.one_sweep = true;
    }
    return plan;
}

ProxResult prox_overlapping_bcd(const Eigen::VectorXd& mu, double lambda, const GroupStructure& gs,
                                const ProxOptions& options, const std::vector<Eigen::VectorXd>* warm_duals)
{
    return prox_overlapping_bcd(mu, lambda, gs, make_bcd_plan(gs, options.order), options, warm_duals);
}

ProxResult prox_overlapping_bcd(const Eigen::VectorXd& mu, double lambda, const GroupStructure& gs,
                                const BcdPlan& plan, const ProxOptions& options,
                                const std::vector<Eigen::VectorXd>* warm_duals)
{
    check_lambda(lambda);
    check_dim(mu, gs.p());
    if (!(options.tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "BCD tolerance must be positive");
    }
    if (options.max_sweeps < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_sweeps must be at least 1");
    }

    const Index m = gs.num_groups();
    ProxResult result;
    result.duals.resize(static_cast<std::size_t>(m));
    bool warm = warm_duals != nullptr && warm_duals->size() == result.duals.size();
    for (Index g = 0; g < m && warm; ++g) {
        warm = (*warm_duals)[static_cast<std::size_t>(g)].size() == gs.group_size(g);
    }
    for (Index g = 0; g < m; ++g) {
        auto& xi = result.duals[static_cast<std::size_t>(g)];
        if (warm) {
            xi = (*warm_duals)[static_cast<std::size_t>(g)];
        } else {
            xi = Eigen::VectorXd::Zero(gs.group_size(g));
        }
    }

    // Running sum of all dual blocks.
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(gs.p());
    if (warm) {
        for (Index g = 0; g < m; ++g) {
            const auto& members = gs.group(g);
            const auto& xi = result.duals[static_cast<std::size_t>(g)];
            for (std::size_t i = 0; i < members.size(); ++i) {
                sum[members[i]] += xi[static_cast<Index>(i)];
            }
        }
    }

    std::vector<char> zeroed(static_cast<std::size_t>(m), 0);
    Eigen::VectorXd r;
    result.converged = false;
    while (result.sweeps < options.max_sweeps) {
        double max_change = 0.0;
        for (Index g : plan.order) {
            const auto& members = gs.group(g);
            auto& xi = result.duals[static_cast<std::size_t>(g)];
            const Index d = static_cast<Index>(members.size());
            r.resize(d);
            for (Index i = 0; i < d; ++i) {
                const Index j = members[static_cast<std::size_t>(i)];
                r[i] = mu[j] - sum[j] + xi[i];
            }
            const double radius = lambda * gs.weight(g);
            const double norm = r.norm();
            const bool inside = norm <= radius;
            zeroed[static_cast<std::size_t>(g)] = inside ? 1 : 0;
            if (!inside) {
                r *= radius / norm;
            }
            double change = 0.0;
            for (Index i = 0; i < d; ++i) {
                const double delta = r[i] - xi[i];
                change += delta * delta;
                sum[members[static_cast<std::size_t>(i)]] += delta;
            }
            xi = r;
            max_change = std::max(max_change, std::sqrt(change));
        }
        ++result.sweeps;
        result.residual = max_change;
        if (options.record_history) {
            result.dual_objective_history.push_back(0.5 * (mu - sum).squaredNorm());
        }
        if (plan.one_sweep) {
            result.converged = true;
            break;
        }
        if (max_change <= options.tol) {
            // Small dual steps alone do not bound the primal direction error
            // on short blocks; also require the alignment certificate.
            recover_primal(mu, gs, options.tol, zeroed, result);
            if (max_alignment(result, lambda, gs) <= 100.0 * options.tol) {
                result.converged = true;
                break;
            }
            sum.setZero();
            for (Index g = 0; g < m; ++g) {
                const auto& members = gs.group(g);
                const auto& xi = result.duals[static_cast<std::size_t>(g)];
                for (std::size_t i = 0; i < members.size(); ++i) {
                    sum[members[i]] += xi[static_cast<Index>(i)];
                }
            }
        }
    }

    recover_primal(mu, gs, options.tol, zeroed, result);
    return result;
}

ProxCertificate prox_certificate(const ProxResult& result, const Eigen::VectorXd& mu, double lambda,
                                 const GroupStructure& gs)
{
    ProxCertificate cert;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(gs.p());
    for (Index g = 0; g < gs.num_groups(); ++g) {
        const auto& members = gs.group(g);
        const auto& xi = result.duals[static_cast<std::size_t>(g)];
        const double radius = lambda * gs.weight(g);
        cert.dual_infeasibility = std::max(cert.dual_infeasibility, xi.norm() - radius);

        double bnorm2 = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            sum[members[i]] += xi[static_cast<Index>(i)];
            bnorm2 += result.beta[members[i]] * result.beta[members[i]];
        }
        if (bnorm2 > 0.0) {
            const double bnorm = std::sqrt(bnorm2);
            double acc = 0.0;
            for (std::size_t i = 0; i < members.size(); ++i) {
                const double target = radius * result.beta[members[i]] / bnorm;
                const double diff = xi[static_cast<Index>(i)] - target;
                acc += diff * diff;
            }
            cert.alignment = std::max(cert.alignment, std::sqrt(acc));
        }
    }
    cert.dual_infeasibility = std::max(0.0, cert.dual_infeasibility);
    cert.linking = (mu - result.beta - sum).cwiseAbs().maxCoeff();
    return cert;
}

Eigen::VectorXd prox(const PenaltySpec& penalty, const Eigen::VectorXd& mu, double lambda,
                     const ProxOptions& options)
{
    return std::visit(
        [&](const auto& k) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, OverlappingGroupLasso>) {
                return prox_overlapping_bcd(mu, lambda, k.groups, options).beta;
            } else if constexpr (std::is_same_v<T, SeparableGroupLasso>) {
                return prox_separable(mu, lambda, k.partition);
            } else if constexpr (std::is_same_v<T, WeightedLasso>) {
                return prox_soft_threshold(mu, lambda, k.weights);
            } else {
                check_dim(mu, k.p);
                if (k.q1 == 1.0 && k.q2 == 1.0) {
                    Eigen::VectorXd c = Eigen::VectorXd::Zero(k.p);
                    for (std::size_t g = 0; g < k.groups.size(); ++g) {
                        for (Index j : k.groups[g]) {
                            c[j] += k.weights[g];
                        }
                    }
                    Eigen::VectorXd out = prox_soft_threshold(mu, lambda, c);
                    return out;
                }
                if (k.q1 == 1.0 && k.q2 == 2.0) {
                    std::vector<char> seen(static_cast<std::size_t>(k.p), 0);
                    for (const auto& g : k.groups) {
                        for (Index j : g) {
                            if (seen[static_cast<std::size_t>(j)]++) {
                                throw Error(ErrorCode::UnsupportedPenalty,
                                            "l1/l2 prox over overlapping groups needs the overlapping penalty");
                            }
                        }
                    }
                    check_lambda(lambda);
                    Eigen::VectorXd out = mu;
                    for (std::size_t g = 0; g < k.groups.size(); ++g) {
                        shrink_block(mu, k.groups[g], lambda * k.weights[g], out);
                    }
                    return out;
                }
                throw Error(ErrorCode::UnsupportedPenalty, "no proximal operator for this lq1/lq2 penalty");
            }
        },
        penalty.kind);
}

} // namespace sepgl
