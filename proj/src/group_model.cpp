#include "sepgl/group_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>

namespace sepgl {

namespace {

ValidationReport violation(ErrorCode code, Index group, Index variable, std::string message)
{
    return ValidationReport{false, code, group, variable, std::move(message)};
}

void throw_if_invalid(const ValidationReport& report)
{
    if (!report.ok) {
        throw Error(report.code, report.message);
    }
}

} // namespace

ValidationReport validate(Index p, const std::vector<IndexSet>& groups,
                          const std::vector<double>& weights)
{
    if (p < 1) {
        return violation(ErrorCode::ValidationError, -1, -1, "variable count must be positive");
    }
    if (groups.empty()) {
        return violation(ErrorCode::ValidationError, -1, -1, "at least one group is required");
    }
    if (weights.size() != groups.size()) {
        return violation(ErrorCode::DimensionMismatch, -1, -1,
                         "got " + std::to_string(weights.size()) + " weights for " +
                             std::to_string(groups.size()) + " groups");
    }
    std::vector<char> covered(static_cast<std::size_t>(p), 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto gi = static_cast<Index>(g);
        if (groups[g].empty()) {
            return violation(ErrorCode::EmptyGroup, gi, -1, "group " + std::to_string(g) + " is empty");
        }
        for (Index j : groups[g]) {
            if (j < 0 || j >= p) {
                return violation(ErrorCode::IndexOutOfRange, gi, j,
                                 "group " + std::to_string(g) + " has index " + std::to_string(j) +
                                     " outside [0, " + std::to_string(p) + ")");
            }
            covered[static_cast<std::size_t>(j)] = 1;
        }
        if (!(weights[g] > 0.0) || !std::isfinite(weights[g])) {
            return violation(ErrorCode::NonpositiveWeight, gi, -1,
                             "group " + std::to_string(g) + " has weight " + std::to_string(weights[g]));
        }
    }
    for (Index j = 0; j < p; ++j) {
        if (!covered[static_cast<std::size_t>(j)]) {
            return violation(ErrorCode::UncoveredVariable, -1, j,
                             "variable " + std::to_string(j) + " belongs to no group");
        }
    }
    return {};
}

GroupStructure::GroupStructure(Index p, std::vector<IndexSet> groups, std::vector<double> weights,
                               std::vector<std::string> names)
    : p_(p), groups_(std::move(groups)), weights_(std::move(weights)), names_(std::move(names))
{
    throw_if_invalid(validate(p_, groups_, weights_));
    for (auto& g : groups_) {
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
    }
    if (!names_.empty() && names_.size() != groups_.size()) {
        throw Error(ErrorCode::DimensionMismatch, "group names do not match group count");
    }
}

std::string GroupStructure::name(Index g) const
{
    if (names_.empty()) {
        return "G" + std::to_string(g + 1);
    }
    return names_[static_cast<std::size_t>(g)];
}

Index GroupStructure::max_group_size() const noexcept
{
    Index d = 0;
    for (const auto& g : groups_) {
        d = std::max(d, static_cast<Index>(g.size()));
    }
    return d;
}

GroupStructure GroupStructure::with_weights(std::vector<double> weights) const
{
    return GroupStructure(p_, groups_, std::move(weights), names_);
}

Index InducedPartition::max_part_size() const noexcept
{
    Index d = 0;
    for (const auto& part : parts) {
        d = std::max(d, static_cast<Index>(part.size()));
    }
    return d;
}

std::vector<Index> InducedPartition::part_of() const
{
    std::vector<Index> owner(static_cast<std::size_t>(p), -1);
    for (std::size_t k = 0; k < parts.size(); ++k) {
        for (Index j : parts[k]) {
            owner[static_cast<std::size_t>(j)] = static_cast<Index>(k);
        }
    }
    return owner;
}

InducedPartition InducedPartition::with_weights(std::vector<double> new_weights) const
{
    if (new_weights.size() != parts.size()) {
        throw Error(ErrorCode::DimensionMismatch, "partition weights do not match part count");
    }
    for (std::size_t k = 0; k < new_weights.size(); ++k) {
        if (!(new_weights[k] > 0.0) || !std::isfinite(new_weights[k])) {
            throw Error(ErrorCode::NonpositiveWeight, "part " + std::to_string(k) + " weight must be positive");
        }
    }
    InducedPartition out = *this;
    out.weights = std::move(new_weights);
    return out;
}

std::vector<Index> overlap_degrees(const GroupStructure& gs)
{
    std::vector<Index> h(static_cast<std::size_t>(gs.p()), 0);
    for (const auto& g : gs.groups()) {
        for (Index j : g) {
            ++h[static_cast<std::size_t>(j)];
        }
    }
    return h;
}

Eigen::VectorXd lasso_weights(const GroupStructure& gs)
{
    Eigen::VectorXd c = Eigen::VectorXd::Zero(gs.p());
    for (Index g = 0; g < gs.num_groups(); ++g) {
        for (Index j : gs.group(g)) {
            c[j] += gs.weight(g);
        }
    }
    return c;
}

InducedPartition induce_partition(const GroupStructure& gs)
{
    const Index p = gs.p();
    const Index m = gs.num_groups();

    // Membership column of the binary group matrix, per variable. Groups are
    // visited in increasing id so every list comes out sorted.
    std::vector<std::vector<Index>> columns(static_cast<std::size_t>(p));
    for (Index g = 0; g < m; ++g) {
        for (Index j : gs.group(g)) {
            columns[static_cast<std::size_t>(j)].push_back(g);
        }
    }

    InducedPartition out;
    out.p = p;
    auto open_part = [&](Index j) {
        out.parts.push_back({j});
        out.membership.push_back(columns[static_cast<std::size_t>(j)]);
        return static_cast<Index>(out.parts.size() - 1);
    };

    // Scanning j upward reproduces the "first unclaimed column seeds the next
    // part" order while only touching each column once.
    if (m <= 64) {
        std::unordered_map<std::uint64_t, Index> seen;
        for (Index j = 0; j < p; ++j) {
            std::uint64_t key = 0;
            for (Index g : columns[static_cast<std::size_t>(j)]) {
                key |= std::uint64_t{1} << g;
            }
            auto it = seen.find(key);
            if (it == seen.end()) {
                seen.emplace(key, open_part(j));
            } else {
                out.parts[static_cast<std::size_t>(it->second)].push_back(j);
            }
        }
    } else {
        std::map<std::vector<Index>, Index> seen;
        for (Index j = 0; j < p; ++j) {
            const auto& key = columns[static_cast<std::size_t>(j)];
            auto it = seen.find(key);
            if (it == seen.end()) {
                seen.emplace(key, open_part(j));
            } else {
                out.parts[static_cast<std::size_t>(it->second)].push_back(j);
            }
        }
    }

    out.weights.reserve(out.parts.size());
    out.degree.reserve(out.parts.size());
    for (const auto& sig : out.membership) {
        double w = 0.0;
        for (Index g : sig) {
            w += gs.weight(g);
        }
        out.weights.push_back(w);
        out.degree.push_back(static_cast<Index>(sig.size()));
    }
    return out;
}

GroupStructure as_group_structure(const InducedPartition& part)
{
    return GroupStructure(part.p, part.parts, part.weights);
}

double assumption_ratio(const GroupStructure& gs, const InducedPartition& part)
{
    const double induced = static_cast<double>(std::max(part.num_parts(), part.max_part_size()));
    const double original = static_cast<double>(std::max(gs.num_groups(), gs.max_group_size()));
    return induced / original;
}

bool is_tree_structured(const GroupStructure& gs)
{
    // A family is laminar iff the groups containing any single variable form
    // a chain under inclusion. The groups containing a variable are exactly
    // the membership signature of its induced part.
    const InducedPartition part = induce_partition(gs);

    std::vector<std::vector<Index>> parts_of_group(static_cast<std::size_t>(gs.num_groups()));
    for (std::size_t k = 0; k < part.membership.size(); ++k) {
        for (Index g : part.membership[k]) {
            parts_of_group[static_cast<std::size_t>(g)].push_back(static_cast<Index>(k));
        }
    }
    auto contains = [&](Index outer, Index inner) {
        for (Index k : parts_of_group[static_cast<std::size_t>(inner)]) {
            const auto& sig = part.membership[static_cast<std::size_t>(k)];
            if (!std::binary_search(sig.begin(), sig.end(), outer)) {
                return false;
            }
        }
        return true;
    };

    std::set<std::pair<Index, Index>> checked;
    for (const auto& sig : part.membership) {
        std::vector<Index> chain = sig;
        std::sort(chain.begin(), chain.end(), [&](Index a, Index b) {
            const auto da = gs.group_size(a);
            const auto db = gs.group_size(b);
            return da != db ? da < db : a < b;
        });
        for (std::size_t i = 1; i < chain.size(); ++i) {
            const auto key = std::make_pair(chain[i - 1], chain[i]);
            if (checked.contains(key)) {
                continue;
            }
            if (!contains(chain[i], chain[i - 1])) {
                return false;
            }
            checked.insert(key);
        }
    }
    return true;
}

} // namespace sepgl
