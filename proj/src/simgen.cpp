#include "sepgl/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sepgl/io.hpp"
#include "sepgl/kernels.hpp"

namespace sepgl {

namespace {

constexpr double kPartCorrelation = 0.6;
constexpr double kGroupCorrelation = 0.36;
constexpr double kMinEigenvalue = 0.1;

Eigen::MatrixXd draw_design(Index n, const Eigen::MatrixXd& factor, CounterRng& rng)
{
    const Index p = factor.rows();
    std::normal_distribution<double> normal;
    Eigen::MatrixXd Z(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            Z(i, j) = normal(rng);
        }
    }
    Eigen::MatrixXd X;
    kernels::mul_lower_t(Z, factor, X);
    return X;
}

Eigen::MatrixXd lower_factor(const Eigen::MatrixXd& theta)
{
    if (theta.rows() != theta.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "covariance must be square");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(theta);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::FactorizationFailure, "covariance is not positive definite");
    }
    return llt.matrixL();
}

} // namespace

void validate(const SimSpec& spec)
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (!(spec.overlap_frac > 0.0 && spec.overlap_frac < 0.5)) {
        fail("overlap_frac must lie in (0, 0.5)");
    }
    if (!(spec.zero_frac >= 0.0 && spec.zero_frac < 1.0)) {
        fail("zero_frac must lie in [0, 1)");
    }
    if (!(spec.sigma2 > 0.0)) {
        fail("sigma2 must be positive");
    }
    if (spec.n < 1) {
        fail("n must be at least 1");
    }
    if (spec.structure != StructureKind::FromFile && spec.m < 1) {
        fail("m must be at least 1");
    }
    if (spec.structure == StructureKind::Interlocking && spec.d < 2) {
        fail("d must be at least 2");
    }
    if (spec.structure == StructureKind::Nested && spec.step < 1) {
        fail("step must be at least 1");
    }
    if (spec.structure == StructureKind::FromFile && spec.group_file.empty()) {
        fail("group_file is required for file structures");
    }
    if (spec.structure != StructureKind::FromFile && zeroed_group_count(spec.zero_frac, spec.m) >= spec.m) {
        fail("zero_frac " + std::to_string(spec.zero_frac) + " zeroes all " + std::to_string(spec.m) + " groups");
    }
    if (spec.weight_rule == WeightRule::Custom && spec.structure != StructureKind::FromFile) {
        fail("custom weights need a group file");
    }
}

std::vector<double> rule_weights(const std::vector<IndexSet>& groups, WeightRule rule)
{
    std::vector<double> w;
    w.reserve(groups.size());
    for (const auto& g : groups) {
        const double d = static_cast<double>(g.size());
        switch (rule) {
        case WeightRule::SqrtSize: w.push_back(std::sqrt(d)); break;
        case WeightRule::InverseSize: w.push_back(1.0 / d); break;
        case WeightRule::Uniform: w.push_back(1.0); break;
        case WeightRule::Custom:
            throw Error(ErrorCode::InvalidArgument, "custom weights cannot be derived from sizes");
        }
    }
    return w;
}

GroupStructure interlocking_groups(Index m, Index d, double overlap_frac, WeightRule rule)
{
    if (m < 1 || d < 1) {
        throw Error(ErrorCode::InvalidArgument, "interlocking groups need m >= 1 and d >= 1");
    }
    const Index o = static_cast<Index>(std::llround(overlap_frac * static_cast<double>(d)));
    if (m > 1 && (o < 1 || o > d - 1)) {
        throw Error(ErrorCode::InvalidOverlap, "overlap " + std::to_string(o) + " outside [1, " +
                                                   std::to_string(d - 1) + "]");
    }
    const Index stride = m > 1 ? d - o : d;
    const Index p = m * d - (m - 1) * (m > 1 ? o : 0);
    std::vector<IndexSet> groups(static_cast<std::size_t>(m));
    for (Index g = 0; g < m; ++g) {
        auto& members = groups[static_cast<std::size_t>(g)];
        members.resize(static_cast<std::size_t>(d));
        std::iota(members.begin(), members.end(), g * stride);
    }
    auto weights = rule_weights(groups, rule);
    return GroupStructure(p, std::move(groups), std::move(weights));
}

GroupStructure nested_groups(Index m, Index step, WeightRule rule)
{
    if (m < 1 || step < 1) {
        throw Error(ErrorCode::InvalidArgument, "nested groups need m >= 1 and step >= 1");
    }
    std::vector<IndexSet> groups(static_cast<std::size_t>(m));
    for (Index g = 0; g < m; ++g) {
        auto& members = groups[static_cast<std::size_t>(g)];
        members.resize(static_cast<std::size_t>((g + 1) * step));
        std::iota(members.begin(), members.end(), Index{0});
    }
    auto weights = rule_weights(groups, rule);
    return GroupStructure(m * step, std::move(groups), std::move(weights));
}

GroupStructure random_structure(Index p, Index m, CounterRng& rng)
{
    std::bernoulli_distribution include(0.5);
    std::uniform_int_distribution<Index> pick_group(0, m - 1);
    std::uniform_int_distribution<Index> pick_var(0, p - 1);
    std::uniform_real_distribution<double> weight(0.5, 2.0);

    std::vector<IndexSet> groups(static_cast<std::size_t>(m));
    for (auto& g : groups) {
        for (Index j = 0; j < p; ++j) {
            if (include(rng)) {
                g.push_back(j);
            }
        }
        if (g.empty()) {
            g.push_back(pick_var(rng));
        }
    }
    std::vector<char> covered(static_cast<std::size_t>(p), 0);
    for (const auto& g : groups) {
        for (Index j : g) {
            covered[static_cast<std::size_t>(j)] = 1;
        }
    }
    for (Index j = 0; j < p; ++j) {
        if (!covered[static_cast<std::size_t>(j)]) {
            auto& g = groups[static_cast<std::size_t>(pick_group(rng))];
            g.insert(std::upper_bound(g.begin(), g.end(), j), j);
        }
    }
    std::vector<double> w(static_cast<std::size_t>(m));
    for (auto& x : w) {
        x = weight(rng);
    }
    return GroupStructure(p, std::move(groups), std::move(w));
}

Eigen::MatrixXd covariance_template(const GroupStructure& gs, const InducedPartition& part)
{
    const Index parts = part.num_parts();
    // share(k, l): parts k and l lie in a common original group.
    Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> share =
        Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic>::Zero(parts, parts);
    std::vector<std::vector<Index>> parts_of_group(static_cast<std::size_t>(gs.num_groups()));
    for (Index k = 0; k < parts; ++k) {
        for (Index g : part.membership[static_cast<std::size_t>(k)]) {
            parts_of_group[static_cast<std::size_t>(g)].push_back(k);
        }
    }
    for (const auto& members : parts_of_group) {
        for (Index a : members) {
            for (Index b : members) {
                share(a, b) = 1;
            }
        }
    }

    const auto owner = part.part_of();
    const Index p = gs.p();
    Eigen::MatrixXd theta(p, p);
    for (Index j = 0; j < p; ++j) {
        const Index kj = owner[static_cast<std::size_t>(j)];
        for (Index i = 0; i < p; ++i) {
            const Index ki = owner[static_cast<std::size_t>(i)];
            double v = 0.0;
            if (i == j) {
                v = 1.0;
            } else if (ki == kj) {
                v = kPartCorrelation;
            } else if (share(ki, kj)) {
                v = kGroupCorrelation;
            }
            theta(i, j) = v;
        }
    }
    return theta;
}

Eigen::MatrixXd build_covariance(const GroupStructure& gs, const InducedPartition& part, CovarianceMode)
{
    const Eigen::MatrixXd raw = covariance_template(gs, part);
    const Eigen::MatrixXd sym = 0.5 * (raw + raw.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorCode::FactorizationFailure, "eigendecomposition failed");
    }
    const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(kMinEigenvalue);
    const Eigen::MatrixXd& V = eig.eigenvectors();
    Eigen::MatrixXd theta = V * clamped.asDiagonal() * V.transpose();
    return 0.5 * (theta + theta.transpose());
}

Eigen::MatrixXd sample_design(Index n, const Eigen::MatrixXd& theta, CounterRng& rng)
{
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "need at least one row");
    }
    return draw_design(n, lower_factor(theta), rng);
}

Index zeroed_group_count(double zero_frac, Index m)
{
    return static_cast<Index>(std::ceil(zero_frac * static_cast<double>(m) - 1e-9));
}

Eigen::VectorXd gen_beta_star(const GroupStructure& gs, double zero_frac, BetaRule rule, CounterRng& rng)
{
    const Index m = gs.num_groups();
    const Index k = zeroed_group_count(zero_frac, m);
    if (!(zero_frac >= 0.0) || k >= m) {
        throw Error(ErrorCode::InvalidArgument, "zero_frac must zero fewer than all groups");
    }
    const Index p = gs.p();
    std::normal_distribution<double> magnitude(10.0, 4.0);
    std::bernoulli_distribution flip(0.5);
    Eigen::VectorXd beta(p);
    for (Index j = 0; j < p; ++j) {
        beta[j] = magnitude(rng);
    }
    for (Index j = 0; j < p; ++j) {
        if (flip(rng)) {
            beta[j] = -beta[j];
        }
    }

    if (rule == BetaRule::RandomGroups) {
        std::vector<Index> ids(static_cast<std::size_t>(m));
        std::iota(ids.begin(), ids.end(), Index{0});
        std::shuffle(ids.begin(), ids.end(), rng);
        for (Index i = 0; i < k; ++i) {
            for (Index j : gs.group(ids[static_cast<std::size_t>(i)])) {
                beta[j] = 0.0;
            }
        }
    } else if (k > 0) {
        for (Index j : gs.group(k - 1)) {
            beta[j] = 0.0;
        }
    }
    if (beta.cwiseAbs().maxCoeff() == 0.0) {
        throw Error(ErrorCode::AllZeroTruth, "zeroed groups cover every variable");
    }
    return beta;
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta_star, double sigma2,
                             CounterRng& rng)
{
    if (X.cols() != beta_star.size()) {
        throw Error(ErrorCode::DimensionMismatch, "design and coefficients disagree");
    }
    if (!(sigma2 > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "noise variance must be positive");
    }
    Eigen::VectorXd y;
    kernels::gemv(X, beta_star, y);
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
    for (Index i = 0; i < y.size(); ++i) {
        y[i] += noise(rng);
    }
    return y;
}

std::vector<double> alt_weights(const InducedPartition& part, PartWeighting scheme, WeightRule base)
{
    switch (scheme) {
    case PartWeighting::Proposed:
        return part.weights;
    case PartWeighting::Uniform:
        return std::vector<double>(part.parts.size(), 1.0);
    case PartWeighting::SizeDependent:
        if (base == WeightRule::Uniform || base == WeightRule::Custom) {
            base = WeightRule::SqrtSize;
        }
        return rule_weights(part.parts, base);
    }
    return part.weights;
}

GroupStructure build_structure(const SimSpec& spec)
{
    switch (spec.structure) {
    case StructureKind::Interlocking:
        return interlocking_groups(spec.m, spec.d, spec.overlap_frac, spec.weight_rule);
    case StructureKind::Nested:
        return nested_groups(spec.m, spec.step, spec.weight_rule);
    case StructureKind::FromFile: {
        GroupStructure gs = parse_group_file(read_text_file(spec.group_file));
        if (spec.weight_rule != WeightRule::Custom) {
            gs = gs.with_weights(rule_weights(gs.groups(), spec.weight_rule));
        }
        return gs;
    }
    }
    throw Error(ErrorCode::InvalidConfig, "unknown structure");
}

SimDesign prepare_design(const SimSpec& spec, std::optional<GroupStructure> groups)
{
    validate(spec);
    SimDesign design;
    design.groups = groups ? std::move(*groups) : build_structure(spec);
    design.partition = induce_partition(design.groups);
    const auto mode = spec.structure == StructureKind::Nested ? CovarianceMode::Nested : CovarianceMode::Interlocking;
    design.theta = build_covariance(design.groups, design.partition, mode);
    design.theta_factor = lower_factor(design.theta);
    return design;
}

SimData simulate_replicate(const SimSpec& spec, const SimDesign& design, std::uint64_t replicate)
{
    CounterRng design_rng = replicate_stream(spec.seed, replicate, Stream::Design);
    CounterRng coef_rng = replicate_stream(spec.seed, replicate, Stream::Coefficients);
    CounterRng noise_rng = replicate_stream(spec.seed, replicate, Stream::Noise);

    SimData data;
    data.problem.X = draw_design(spec.n, design.theta_factor, design_rng);
    // A redraw continues the same stream, so retries stay reproducible.
    for (int attempt = 0;; ++attempt) {
        try {
            data.beta_star = gen_beta_star(design.groups, spec.zero_frac, spec.beta_rule, coef_rng);
            break;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::AllZeroTruth || attempt >= 100) {
                throw;
            }
        }
    }
    data.problem.y = gen_response(data.problem.X, data.beta_star, spec.sigma2, noise_rng);
    data.problem.loss = Loss::Squared;
    return data;
}

} // namespace sepgl
