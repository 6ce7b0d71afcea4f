#include "sepgl/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sepgl/prox.hpp"

namespace sepgl {

namespace {

void check_dim(const Eigen::VectorXd& beta, Index p, const char* what)
{
    if (beta.size() != p) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": vector has length " +
                                                      std::to_string(beta.size()) + ", expected " +
                                                      std::to_string(p));
    }
}

double block_norm(const Eigen::VectorXd& beta, const IndexSet& block)
{
    double acc = 0.0;
    for (Index j : block) {
        acc += beta[j] * beta[j];
    }
    return std::sqrt(acc);
}

void check_exponent(double q)
{
    if (!(q > 0.0)) {
        throw Error(ErrorCode::InvalidExponent, "exponent must lie in (0, inf], got " + std::to_string(q));
    }
}

} // namespace

PenaltySpec PenaltySpec::overlapping(GroupStructure gs)
{
    return PenaltySpec{OverlappingGroupLasso{std::move(gs)}};
}

PenaltySpec PenaltySpec::separable(InducedPartition part)
{
    return PenaltySpec{SeparableGroupLasso{std::move(part)}};
}

PenaltySpec PenaltySpec::weighted_lasso(Eigen::VectorXd c)
{
    for (Index j = 0; j < c.size(); ++j) {
        if (!(c[j] > 0.0) || !std::isfinite(c[j])) {
            throw Error(ErrorCode::NonpositiveWeight, "lasso weight " + std::to_string(j) + " must be positive");
        }
    }
    return PenaltySpec{WeightedLasso{std::move(c)}};
}

PenaltySpec PenaltySpec::weighted_lasso(const GroupStructure& gs)
{
    return weighted_lasso(lasso_weights(gs));
}

PenaltySpec PenaltySpec::general(Index p, std::vector<IndexSet> groups, std::vector<double> weights,
                                 double q1, double q2)
{
    check_exponent(q1);
    check_exponent(q2);
    if (groups.size() != weights.size()) {
        throw Error(ErrorCode::DimensionMismatch, "group and weight counts differ");
    }
    for (std::size_t g = 0; g < weights.size(); ++g) {
        if (!(weights[g] > 0.0)) {
            throw Error(ErrorCode::NonpositiveWeight, "group " + std::to_string(g) + " weight must be positive");
        }
        for (Index j : groups[g]) {
            if (j < 0 || j >= p) {
                throw Error(ErrorCode::IndexOutOfRange, "group " + std::to_string(g) + " index out of range");
            }
        }
    }
    return PenaltySpec{GeneralLq{p, std::move(groups), std::move(weights), q1, q2}};
}

Index PenaltySpec::dimension() const
{
    return std::visit(
        [](const auto& k) -> Index {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, OverlappingGroupLasso>) {
                return k.groups.p();
            } else if constexpr (std::is_same_v<T, SeparableGroupLasso>) {
                return k.partition.p;
            } else if constexpr (std::is_same_v<T, WeightedLasso>) {
                return k.weights.size();
            } else {
                return k.p;
            }
        },
        kind);
}

std::string PenaltySpec::label() const
{
    return std::visit(
        [](const auto& k) -> std::string {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, OverlappingGroupLasso>) {
                return "overlapping";
            } else if constexpr (std::is_same_v<T, SeparableGroupLasso>) {
                return "separable";
            } else if constexpr (std::is_same_v<T, WeightedLasso>) {
                return "weighted_lasso";
            } else {
                return "general_lq";
            }
        },
        kind);
}

double phi(const Eigen::VectorXd& beta, const GroupStructure& gs)
{
    check_dim(beta, gs.p(), "phi");
    double total = 0.0;
    for (Index g = 0; g < gs.num_groups(); ++g) {
        total += gs.weight(g) * block_norm(beta, gs.group(g));
    }
    return total;
}

double psi(const Eigen::VectorXd& beta, const InducedPartition& part)
{
    check_dim(beta, part.p, "psi");
    double total = 0.0;
    for (std::size_t k = 0; k < part.parts.size(); ++k) {
        total += part.weights[k] * block_norm(beta, part.parts[k]);
    }
    return total;
}

double weighted_lasso(const Eigen::VectorXd& beta, const Eigen::VectorXd& c)
{
    check_dim(beta, c.size(), "weighted_lasso");
    return c.dot(beta.cwiseAbs());
}

double lq_vector_norm(const Eigen::VectorXd& x, double q)
{
    check_exponent(q);
    const double scale = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        return 0.0;
    }
    if (std::isinf(q)) {
        return scale;
    }
    if (q == 2.0) {
        return x.norm();
    }
    if (q == 1.0) {
        return x.cwiseAbs().sum();
    }
    double acc = 0.0;
    for (Index j = 0; j < x.size(); ++j) {
        acc += std::pow(std::abs(x[j]) / scale, q);
    }
    return scale * std::pow(acc, 1.0 / q);
}

double lq_norm(const Eigen::VectorXd& beta, const std::vector<IndexSet>& groups,
               const std::vector<double>& weights, double q1, double q2)
{
    check_exponent(q1);
    check_exponent(q2);
    if (groups.size() != weights.size()) {
        throw Error(ErrorCode::DimensionMismatch, "group and weight counts differ");
    }
    std::vector<double> inner(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        Eigen::VectorXd block(static_cast<Index>(groups[g].size()));
        for (std::size_t i = 0; i < groups[g].size(); ++i) {
            const Index j = groups[g][i];
            if (j < 0 || j >= beta.size()) {
                throw Error(ErrorCode::DimensionMismatch, "group index exceeds vector length");
            }
            block[static_cast<Index>(i)] = beta[j];
        }
        inner[g] = lq_vector_norm(block, q2);
    }
    if (std::isinf(q1)) {
        double best = 0.0;
        for (std::size_t g = 0; g < inner.size(); ++g) {
            best = std::max(best, weights[g] * inner[g]);
        }
        return best;
    }
    double acc = 0.0;
    for (std::size_t g = 0; g < inner.size(); ++g) {
        acc += weights[g] * std::pow(inner[g], q1);
    }
    return std::pow(acc, 1.0 / q1);
}

double evaluate(const PenaltySpec& penalty, const Eigen::VectorXd& beta)
{
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, OverlappingGroupLasso>) {
                return phi(beta, k.groups);
            } else if constexpr (std::is_same_v<T, SeparableGroupLasso>) {
                return psi(beta, k.partition);
            } else if constexpr (std::is_same_v<T, WeightedLasso>) {
                return weighted_lasso(beta, k.weights);
            } else {
                check_dim(beta, k.p, "lq_norm");
                return lq_norm(beta, k.groups, k.weights, k.q1, k.q2);
            }
        },
        penalty.kind);
}

double dual_upper_bound(const Eigen::VectorXd& v, const GroupStructure& gs)
{
    check_dim(v, gs.p(), "dual_upper_bound");
    const auto h = overlap_degrees(gs);
    double best = 0.0;
    for (Index g = 0; g < gs.num_groups(); ++g) {
        double acc = 0.0;
        for (Index j : gs.group(g)) {
            const double hv = v[j] / static_cast<double>(h[static_cast<std::size_t>(j)]);
            acc += hv * hv;
        }
        best = std::max(best, std::sqrt(acc) / gs.weight(g));
    }
    return best;
}

double separable_dual_norm(const Eigen::VectorXd& v, const InducedPartition& part)
{
    check_dim(v, part.p, "separable_dual_norm");
    double best = 0.0;
    for (std::size_t k = 0; k < part.parts.size(); ++k) {
        best = std::max(best, block_norm(v, part.parts[k]) / part.weights[k]);
    }
    return best;
}

double lasso_dual_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& c)
{
    check_dim(v, c.size(), "lasso_dual_norm");
    return v.cwiseAbs().cwiseQuotient(c).maxCoeff();
}

double dual_norm_or_bound(const Eigen::VectorXd& v, const PenaltySpec& penalty)
{
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, OverlappingGroupLasso>) {
                return dual_upper_bound(v, k.groups);
            } else if constexpr (std::is_same_v<T, SeparableGroupLasso>) {
                return separable_dual_norm(v, k.partition);
            } else if constexpr (std::is_same_v<T, WeightedLasso>) {
                return lasso_dual_norm(v, k.weights);
            } else {
                throw Error(ErrorCode::UnsupportedPenalty, "no dual norm for general lq penalties");
            }
        },
        penalty.kind);
}

namespace {

// prox of tau * penalty at z, reusing BCD duals between calls for the overlapping case.
class BallProjector {
public:
    BallProjector(const PenaltySpec& penalty) : penalty_(penalty)
    {
        if (const auto* ogl = std::get_if<OverlappingGroupLasso>(&penalty_.kind)) {
            plan_ = make_bcd_plan(ogl->groups, SweepOrder::Auto);
            options_.tol = 1e-13;
        }
    }

    Eigen::VectorXd prox_at(const Eigen::VectorXd& z, double tau)
    {
        if (const auto* ogl = std::get_if<OverlappingGroupLasso>(&penalty_.kind)) {
            auto result = prox_overlapping_bcd(z, tau, ogl->groups, plan_, options_,
                                               duals_.empty() ? nullptr : &duals_);
            duals_ = std::move(result.duals);
            return std::move(result.beta);
        }
        return prox(penalty_, z, tau);
    }

    Eigen::VectorXd project(const Eigen::VectorXd& z, double radius)
    {
        const double value = evaluate(penalty_, z);
        if (value <= radius) {
            return z;
        }
        // penalty(prox_tau(z)) decreases from penalty(z) at tau = 0 to 0 once
        // tau reaches the dual norm of z.
        double hi = 0.0;
        if (std::holds_alternative<GeneralLq>(penalty_.kind)) {
            hi = 1.0;
            while (evaluate(penalty_, prox_at(z, hi)) > radius) {
                hi *= 2.0;
            }
        } else {
            hi = dual_norm_or_bound(z, penalty_);
        }
        double lo = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (evaluate(penalty_, prox_at(z, mid)) > radius) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Eigen::VectorXd u = prox_at(z, hi);
        const double uval = evaluate(penalty_, u);
        if (uval > radius) {
            u *= radius / uval;
        }
        return u;
    }

private:
    const PenaltySpec& penalty_;
    BcdPlan plan_;
    ProxOptions options_;
    std::vector<Eigen::VectorXd> duals_;
};

} // namespace

Eigen::VectorXd project_onto_ball(const Eigen::VectorXd& z, const PenaltySpec& penalty, double radius)
{
    BallProjector projector(penalty);
    return projector.project(z, radius);
}

double dual_estimate(const Eigen::VectorXd& v, const PenaltySpec& penalty, const DualEstimateOptions& options)
{
    check_dim(v, penalty.dimension(), "dual_estimate");
    if (v.norm() == 0.0) {
        return 0.0;
    }
    const auto* ogl = std::get_if<OverlappingGroupLasso>(&penalty.kind);
    BcdPlan plan;
    ProxOptions prox_options;
    prox_options.tol = options.prox_tol;
    prox_options.max_sweeps = options.prox_max_sweeps;
    if (ogl) {
        plan = make_bcd_plan(ogl->groups, SweepOrder::Auto);
    }
    std::vector<Eigen::VectorXd> duals;
    auto prox_at = [&](double tau) {
        if (!ogl) {
            return prox(penalty, v, tau, prox_options);
        }
        auto result = prox_overlapping_bcd(v, tau, ogl->groups, plan, prox_options, duals.empty() ? nullptr : &duals);
        duals = std::move(result.duals);
        return std::move(result.beta);
    };

    // prox_tau(v) = 0 exactly when tau >= ||v||_*. Any nonzero output beta
    // satisfies v^T beta / pen(beta) >= tau, so it certifies a lower bound.
    double best = 0.0;
    auto score = [&](const Eigen::VectorXd& beta) {
        const double value = evaluate(penalty, beta);
        if (value > 0.0) {
            best = std::max(best, beta.dot(v) / value);
            return true;
        }
        return false;
    };

    double hi = 0.0;
    if (std::holds_alternative<GeneralLq>(penalty.kind)) {
        hi = 1.0;
        while (score(prox_at(hi))) {
            hi *= 2.0;
        }
    } else {
        hi = dual_norm_or_bound(v, penalty);
    }
    double lo = 0.0;
    for (int it = 0; it < options.bisection_steps && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (score(prox_at(mid))) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return best;
}

SandwichResult sandwich_check(const GroupStructure& gs, const InducedPartition& part,
                              const Eigen::VectorXd& beta)
{
    SandwichResult out;
    out.phi = phi(beta, gs);
    out.psi = psi(beta, part);
    out.wlasso = weighted_lasso(beta, lasso_weights(gs));

    const auto owner = part.part_of();
    Index support_part = -1;
    out.single_part = true;
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta[j] == 0.0) {
            continue;
        }
        const Index k = owner[static_cast<std::size_t>(j)];
        if (support_part == -1) {
            support_part = k;
        } else if (k != support_part) {
            out.single_part = false;
            break;
        }
    }

    const double scale = 1.0 + out.psi;
    const double tol = 1e-12 * scale;
    double violation = std::max({0.0, out.phi - out.psi, out.psi - out.wlasso});
    if (out.single_part) {
        violation = std::max(violation, std::abs(out.phi - out.psi));
    }
    out.violation = violation / scale;
    out.ok = violation <= tol;
    return out;
}

} // namespace sepgl
