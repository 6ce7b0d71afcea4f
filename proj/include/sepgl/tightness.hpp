#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepgl/group_model.hpp"
#include "sepgl/penalties.hpp"

namespace sepgl {

// Falsification search for a separable lq1/lq2 norm squeezed strictly between
// the overlapping norm phi and its induced separable relaxation psi. For every
// partition of [p] and exponent pair on the grid, weights are fitted from the
// samples supported inside a single block, the fitted norm is checked against
// phi <= N <= psi on all samples, and a local search tries to break any
// candidate that survives. A counterexample must satisfy the sandwich on
// every sample and fall below psi by a clear margin somewhere.

enum class CandidateStatus {
    InfeasibleWeights, ///< no weight fits the single-block samples
    ViolatesLower,     ///< N < phi somewhere
    ViolatesUpper,     ///< N > psi somewhere
    NotStrict,         ///< sandwich holds but N == psi on every sample
    Counterexample,
};

std::string to_string(CandidateStatus status);

struct TightnessCandidate {
    std::vector<IndexSet> partition;
    double q1 = 1.0;
    double q2 = 2.0;
    std::vector<double> weights;
    CandidateStatus status = CandidateStatus::InfeasibleWeights;
    double lower_violation = 0.0;
    double upper_violation = 0.0;
    double strict_gap = 0.0;
};

struct TightnessOptions {
    std::vector<double> q_grid{0.5, 1.0, 2.0, kInf};
    int random_samples = 1500;
    int local_search_starts = 8;
    int local_search_steps = 300;
    /// Relative tolerance on the sandwich inequalities.
    double tol = 1e-9;
    /// Relative margin below psi required for strictness.
    double strict_margin = 1e-6;
    std::uint64_t seed = 1;
};

struct TightnessReport {
    int partitions = 0;
    int candidates = 0;
    int infeasible = 0;
    int violates_lower = 0;
    int violates_upper = 0;
    int not_strict = 0;
    std::vector<TightnessCandidate> counterexamples;
};

/// All set partitions of {0..p-1} in restricted-growth order.
std::vector<std::vector<IndexSet>> enumerate_partitions(Index p);

/// Requires p <= 6.
TightnessReport tightness_search(const GroupStructure& gs, const TightnessOptions& options = {});

} // namespace sepgl
