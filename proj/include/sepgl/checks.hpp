#pragma once

#include <cstdint>
#include <string>

#include "sepgl/group_model.hpp"
#include "sepgl/rng.hpp"

namespace sepgl {

// Randomized self-checks behind `sepgl check`. Each trial draws a fresh
// random structure; all draws come from CounterRng(seed, trial).

struct CheckReport {
    std::string name;
    int trials = 0;
    int failures = 0;
    /// Largest relative violation (sandwich), excess (dual) or gap (kkt).
    double worst = 0.0;
    /// Counterexamples (theorem1-search) or skipped trials (kkt).
    int extra = 0;
    bool passed() const { return failures == 0; }
};

/// Random beta: dense, sparse, or supported on one induced part, cycling with `kind`.
Eigen::VectorXd random_beta(const InducedPartition& part, int kind, CounterRng& rng);

/// phi <= psi <= weighted lasso (1e-12 relative) on p <= 30, m <= 8.
CheckReport check_sandwich(int trials, std::uint64_t seed);

/// dual_estimate <= dual_upper_bound + 1e-8 on p <= 12, m <= 5.
CheckReport check_dual(int trials, std::uint64_t seed);

/// Stationarity gap of separable and weighted-lasso fits on small Gaussian problems.
CheckReport check_kkt(int trials, std::uint64_t seed, double tol = 1e-6);

/// Tightness searches on random overlapping structures with 2 <= p <= 4.
CheckReport check_theorem1(int trials, std::uint64_t seed);

} // namespace sepgl
