#include "sepgl/tightness.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sepgl/rng.hpp"

namespace sepgl {

std::string to_string(CandidateStatus status)
{
    switch (status) {
    case CandidateStatus::InfeasibleWeights: return "infeasible_weights";
    case CandidateStatus::ViolatesLower: return "violates_lower";
    case CandidateStatus::ViolatesUpper: return "violates_upper";
    case CandidateStatus::NotStrict: return "not_strict";
    case CandidateStatus::Counterexample: return "counterexample";
    }
    return "unknown";
}

std::vector<std::vector<IndexSet>> enumerate_partitions(Index p)
{
    std::vector<std::vector<IndexSet>> out;
    if (p < 1) {
        return out;
    }
    // Restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1]).
    std::vector<Index> a(static_cast<std::size_t>(p), 0);
    while (true) {
        Index blocks = 1 + *std::max_element(a.begin(), a.end());
        std::vector<IndexSet> partition(static_cast<std::size_t>(blocks));
        for (Index j = 0; j < p; ++j) {
            partition[static_cast<std::size_t>(a[static_cast<std::size_t>(j)])].push_back(j);
        }
        out.push_back(std::move(partition));

        Index i = p - 1;
        for (; i >= 1; --i) {
            const Index prefix_max = *std::max_element(a.begin(), a.begin() + i);
            if (a[static_cast<std::size_t>(i)] <= prefix_max) {
                ++a[static_cast<std::size_t>(i)];
                std::fill(a.begin() + i + 1, a.end(), 0);
                break;
            }
        }
        if (i < 1) {
            break;
        }
    }
    return out;
}

namespace {

struct Sample {
    Eigen::VectorXd beta;
    double phi;
    double psi;
};

struct Fit {
    double lower = 0.0;
    double upper = 0.0;
    double gap = 0.0;
};

class Search {
public:
    Search(const GroupStructure& gs, const TightnessOptions& options)
        : gs_(gs), part_(induce_partition(gs)), options_(options), rng_(options.seed, 0)
    {
        build_samples();
    }

    TightnessReport run()
    {
        TightnessReport report;
        const auto partitions = enumerate_partitions(gs_.p());
        report.partitions = static_cast<int>(partitions.size());
        for (const auto& partition : partitions) {
            for (double q1 : options_.q_grid) {
                for (double q2 : options_.q_grid) {
                    TightnessCandidate c = examine(partition, q1, q2);
                    ++report.candidates;
                    switch (c.status) {
                    case CandidateStatus::InfeasibleWeights: ++report.infeasible; break;
                    case CandidateStatus::ViolatesLower: ++report.violates_lower; break;
                    case CandidateStatus::ViolatesUpper: ++report.violates_upper; break;
                    case CandidateStatus::NotStrict: ++report.not_strict; break;
                    case CandidateStatus::Counterexample: report.counterexamples.push_back(c); break;
                    }
                }
            }
        }
        return report;
    }

private:
    void add_sample(Eigen::VectorXd beta)
    {
        const double n = beta.norm();
        if (n == 0.0) {
            return;
        }
        beta /= n;
        const double ph = phi(beta, gs_);
        const double ps = psi(beta, part_);
        samples_.push_back({std::move(beta), ph, ps});
    }

    void build_samples()
    {
        const Index p = gs_.p();
        // Sign vertices of every coordinate subset: {-1, 0, 1}^p without 0.
        Index total = 1;
        for (Index j = 0; j < p; ++j) {
            total *= 3;
        }
        for (Index code = 1; code < total; ++code) {
            Eigen::VectorXd beta(p);
            Index c = code;
            for (Index j = 0; j < p; ++j) {
                beta[j] = static_cast<double>(c % 3) - 1.0;
                c /= 3;
            }
            add_sample(std::move(beta));
        }
        std::normal_distribution<double> normal;
        std::bernoulli_distribution keep(0.5);
        for (int s = 0; s < options_.random_samples; ++s) {
            Eigen::VectorXd beta(p);
            const bool sparse = s % 2 == 1;
            for (Index j = 0; j < p; ++j) {
                beta[j] = (sparse && !keep(rng_)) ? 0.0 : normal(rng_);
            }
            add_sample(std::move(beta));
        }
    }

    double norm_of(const Eigen::VectorXd& beta, const std::vector<IndexSet>& partition,
                   const std::vector<double>& weights, double q1, double q2) const
    {
        return lq_norm(beta, partition, weights, q1, q2);
    }

    Fit fit_on_samples(const std::vector<IndexSet>& partition, const std::vector<double>& weights,
                       double q1, double q2) const
    {
        Fit fit;
        for (const auto& s : samples_) {
            const double value = norm_of(s.beta, partition, weights, q1, q2);
            fit.lower = std::max(fit.lower, (s.phi - value) / s.psi);
            fit.upper = std::max(fit.upper, (value - s.psi) / s.psi);
            fit.gap = std::max(fit.gap, (s.psi - value) / s.psi);
        }
        return fit;
    }

    // Hill-climb on the unit sphere to maximise a relative violation,
    // starting from the samples that come closest to violating.
    double local_max(const std::vector<IndexSet>& partition, const std::vector<double>& weights, double q1,
                     double q2, bool lower_side)
    {
        auto violation = [&](const Eigen::VectorXd& beta) {
            const double value = norm_of(beta, partition, weights, q1, q2);
            const double ph = phi(beta, gs_);
            const double ps = psi(beta, part_);
            return lower_side ? (ph - value) / ps : (value - ps) / ps;
        };
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(samples_.size());
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            ranked.emplace_back(violation(samples_[i].beta), i);
        }
        const auto starts = std::min<std::size_t>(static_cast<std::size_t>(options_.local_search_starts), ranked.size());
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(starts), ranked.end(),
                          [](const auto& a, const auto& b) { return a.first > b.first; });

        std::normal_distribution<double> normal;
        double best = ranked.empty() ? 0.0 : ranked.front().first;
        for (std::size_t s = 0; s < starts; ++s) {
            Eigen::VectorXd beta = samples_[ranked[s].second].beta;
            double current = ranked[s].first;
            double step = 0.1;
            int failures = 0;
            for (int it = 0; it < options_.local_search_steps && step > 1e-9; ++it) {
                Eigen::VectorXd trial = beta;
                for (Index j = 0; j < trial.size(); ++j) {
                    trial[j] += step * normal(rng_);
                }
                const double n = trial.norm();
                if (n == 0.0) {
                    continue;
                }
                trial /= n;
                const double value = violation(trial);
                if (value > current) {
                    beta = std::move(trial);
                    current = value;
                    failures = 0;
                } else if (++failures >= 15) {
                    step *= 0.5;
                    failures = 0;
                }
            }
            best = std::max(best, current);
        }
        return best;
    }

    TightnessCandidate examine(const std::vector<IndexSet>& partition, double q1, double q2)
    {
        TightnessCandidate cand;
        cand.partition = partition;
        cand.q1 = q1;
        cand.q2 = q2;

        const auto blocks = partition.size();
        std::vector<Index> block_of(static_cast<std::size_t>(gs_.p()));
        for (std::size_t k = 0; k < blocks; ++k) {
            for (Index j : partition[k]) {
                block_of[static_cast<std::size_t>(j)] = static_cast<Index>(k);
            }
        }

        // On samples supported inside block k the candidate equals
        // scale_k * ||beta_k||_{q2}, which pins scale_k between phi and psi.
        std::vector<double> lo(blocks, 0.0);
        std::vector<double> hi(blocks, kInf);
        for (const auto& s : samples_) {
            Index block = -1;
            bool single = true;
            for (Index j = 0; j < s.beta.size() && single; ++j) {
                if (s.beta[j] == 0.0) {
                    continue;
                }
                const Index k = block_of[static_cast<std::size_t>(j)];
                if (block == -1) {
                    block = k;
                } else if (k != block) {
                    single = false;
                }
            }
            if (!single || block < 0) {
                continue;
            }
            Eigen::VectorXd sub(static_cast<Index>(partition[static_cast<std::size_t>(block)].size()));
            for (std::size_t i = 0; i < partition[static_cast<std::size_t>(block)].size(); ++i) {
                sub[static_cast<Index>(i)] = s.beta[partition[static_cast<std::size_t>(block)][i]];
            }
            const double a = lq_vector_norm(sub, q2);
            lo[static_cast<std::size_t>(block)] = std::max(lo[static_cast<std::size_t>(block)], s.phi / a);
            hi[static_cast<std::size_t>(block)] = std::min(hi[static_cast<std::size_t>(block)], s.psi / a);
        }
        for (std::size_t k = 0; k < blocks; ++k) {
            if (lo[k] > hi[k] * (1.0 + options_.tol)) {
                cand.status = CandidateStatus::InfeasibleWeights;
                cand.lower_violation = lo[k] / hi[k] - 1.0;
                return cand;
            }
        }

        auto to_weights = [&](const std::vector<double>& scales) {
            std::vector<double> w(scales.size());
            for (std::size_t k = 0; k < scales.size(); ++k) {
                w[k] = std::isinf(q1) ? scales[k] : std::pow(scales[k], q1);
            }
            return w;
        };
        std::vector<std::vector<double>> trials;
        trials.push_back(to_weights(lo));
        trials.push_back(to_weights(hi));
        std::vector<double> mid(blocks);
        for (std::size_t k = 0; k < blocks; ++k) {
            mid[k] = 0.5 * (lo[k] + hi[k]);
        }
        trials.push_back(to_weights(mid));

        bool have = false;
        for (auto& w : trials) {
            Fit fit = fit_on_samples(partition, w, q1, q2);
            CandidateStatus status;
            if (fit.lower > options_.tol) {
                status = CandidateStatus::ViolatesLower;
            } else if (fit.upper > options_.tol) {
                status = CandidateStatus::ViolatesUpper;
            } else if (fit.gap < options_.strict_margin) {
                status = CandidateStatus::NotStrict;
            } else {
                fit.lower = std::max(fit.lower, local_max(partition, w, q1, q2, true));
                fit.upper = std::max(fit.upper, local_max(partition, w, q1, q2, false));
                if (fit.lower > options_.tol) {
                    status = CandidateStatus::ViolatesLower;
                } else if (fit.upper > options_.tol) {
                    status = CandidateStatus::ViolatesUpper;
                } else {
                    status = CandidateStatus::Counterexample;
                }
            }
            // Keep the trial that got furthest: counterexample > not strict > least violation.
            auto rank = [](CandidateStatus st) {
                switch (st) {
                case CandidateStatus::Counterexample: return 3;
                case CandidateStatus::NotStrict: return 2;
                default: return 1;
                }
            };
            const double violation = std::max(fit.lower, fit.upper);
            const double best_violation = std::max(cand.lower_violation, cand.upper_violation);
            if (!have || rank(status) > rank(cand.status) ||
                (rank(status) == rank(cand.status) && violation < best_violation)) {
                cand.status = status;
                cand.weights = w;
                cand.lower_violation = fit.lower;
                cand.upper_violation = fit.upper;
                cand.strict_gap = fit.gap;
                have = true;
            }
        }
        return cand;
    }

    const GroupStructure& gs_;
    InducedPartition part_;
    TightnessOptions options_;
    CounterRng rng_;
    std::vector<Sample> samples_;
};

} // namespace

TightnessReport tightness_search(const GroupStructure& gs, const TightnessOptions& options)
{
    if (gs.p() > 6) {
        throw Error(ErrorCode::InvalidArgument, "tightness search enumerates partitions; p must be <= 6");
    }
    Search search(gs, options);
    return search.run();
}

} // namespace sepgl
