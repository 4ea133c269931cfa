#pragma once

// Parallel split-and-combine optimization runs with injected per-iteration delays.

#include "splitflow/opt/least_squares.hpp"
#include "splitflow/schedule.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace splitflow::opt {

/// Per-iteration delay for a full-data iteration, in milliseconds. A shard
/// holding a fraction r of the rows sleeps r * max(0, N(mean, sigma^2)) per step.
struct JitterProfile {
    double mean_ms = 0.0;
    double sigma_ms = 0.0;

    /// "mean_ms:sigma_ms"
    static JitterProfile parse(const std::string& text);
};

struct OptExperimentConfig {
    std::vector<double> f_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t trials_per_f = 20;
    JitterProfile jitter_i;
    JitterProfile jitter_j;
    std::uint64_t seed = 0;
    bool randomize_order = true;
    SolverOptions solver;
};

struct OptTrialRecord {
    std::size_t trial_id = 0;
    double fraction = 0.0;
    std::int64_t completion_ns = 0;
    double quality_gap = 0.0;  ///< relative l2 error of combined theta vs the full-data solve
    std::size_t iterations_i = 0;
    std::size_t iterations_j = 0;
    std::size_t rows_i = 0;
    std::size_t rows_j = 0;
    bool ok = true;
    std::string error;
};

/// One trial: both shards solved concurrently with injected delays, then combined.
/// Solver failures are recorded in the result (ok = false), not thrown.
OptTrialRecord run_opt_trial(const Dataset& data, std::span<const double> full_solution, double fraction,
                             std::size_t trial_id, const OptExperimentConfig& config);

/// trials_per_f trials per grid value, sequential, in shuffled order when
/// randomize_order is set. Record order is execution order.
std::vector<OptTrialRecord> run_opt_experiment(const Dataset& data, const OptExperimentConfig& config);

}  // namespace splitflow::opt
