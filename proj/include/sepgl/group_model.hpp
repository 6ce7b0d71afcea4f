#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sepgl/error.hpp"

namespace sepgl {

using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/// Result of checking a candidate group family. `group` and `variable` are -1
/// when the violation does not refer to one.
struct ValidationReport {
    bool ok = true;
    ErrorCode code = ErrorCode::ValidationError;
    Index group = -1;
    Index variable = -1;
    std::string message;
};

/**
 * Original (possibly overlapping) groups over p variables with positive weights.
 *
 * Indices are 0-based and each group is stored sorted and deduplicated. The
 * union of the groups must cover every variable. Identical groups are allowed
 * and remain distinct.
 */
class GroupStructure {
public:
    GroupStructure() = default;

    /// Throws Error with the first violated invariant.
    GroupStructure(Index p, std::vector<IndexSet> groups, std::vector<double> weights,
                   std::vector<std::string> names = {});

    Index p() const noexcept { return p_; }
    Index num_groups() const noexcept { return static_cast<Index>(groups_.size()); }
    const std::vector<IndexSet>& groups() const noexcept { return groups_; }
    const IndexSet& group(Index g) const { return groups_[static_cast<std::size_t>(g)]; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double weight(Index g) const { return weights_[static_cast<std::size_t>(g)]; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::string name(Index g) const;

    Index group_size(Index g) const { return static_cast<Index>(group(g).size()); }
    Index max_group_size() const noexcept;

    /// Same groups with new weights (validated).
    GroupStructure with_weights(std::vector<double> weights) const;

private:
    Index p_ = 0;
    std::vector<IndexSet> groups_;
    std::vector<double> weights_;
    std::vector<std::string> names_;
};

ValidationReport validate(Index p, const std::vector<IndexSet>& groups,
                          const std::vector<double>& weights);

/// Disjoint parts with merged weights, produced by induce_partition.
struct InducedPartition {
    Index p = 0;
    std::vector<IndexSet> parts;
    std::vector<double> weights;
    /// Sorted ids of the original groups containing each part.
    std::vector<std::vector<Index>> membership;
    std::vector<Index> degree;

    Index num_parts() const noexcept { return static_cast<Index>(parts.size()); }
    Index max_part_size() const noexcept;
    /// Part id of every variable.
    std::vector<Index> part_of() const;
    /// Same parts with replaced weights (all must be positive).
    InducedPartition with_weights(std::vector<double> new_weights) const;
};

/// Number of groups containing each variable.
std::vector<Index> overlap_degrees(const GroupStructure& gs);

/// c_j = sum of weights of the groups containing j.
Eigen::VectorXd lasso_weights(const GroupStructure& gs);

/**
 * Overlapping-induced partition. Variables share a part iff they belong to
 * exactly the same original groups. Parts are emitted in order of their
 * lowest variable index and weighted by the sum of weights of their groups.
 */
InducedPartition induce_partition(const GroupStructure& gs);

/// Partition viewed as a (disjoint) group structure with the partition weights.
GroupStructure as_group_structure(const InducedPartition& part);

/// max{#parts, largest part} / max{#groups, largest group}.
double assumption_ratio(const GroupStructure& gs, const InducedPartition& part);

/// Any two groups are either disjoint or nested.
bool is_tree_structured(const GroupStructure& gs);

} // namespace sepgl
