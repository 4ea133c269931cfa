#pragma once

// Seeded simulation of the partitioned workflow.

#include "splitflow/model.hpp"
#include "splitflow/rng.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>

namespace splitflow {

struct SimConfig {
    std::size_t trials = 100'000;
    std::uint64_t seed = 0;
    bool clamp_negative = true;
    /// Worker threads; 0 picks std::thread::hardware_concurrency(). Results do not depend on it.
    unsigned threads = 0;
};

struct SimResult {
    double empirical_mean = 0.0;
    double empirical_variance = 0.0;  ///< unbiased (n - 1)
    double std_error_mean = 0.0;      ///< sample std / sqrt(trials)
    std::size_t trials = 0;
    std::size_t clamped_count = 0;
    bool variance_defined = true;     ///< false for a single trial (variance reported as 0)

    friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// One joint completion time: every channel draws a standard Normal z_k in
/// channel order and takes f_k mu_k + f_k sigma_k z_k (point masses give 0);
/// the maximum is returned, clamped at 0 when requested.
template <std::uniform_random_bit_generator Gen>
double sample_completion(const PartitionedModel& model, Gen& gen, bool clamp_negative = true) {
    std::normal_distribution<double> z(0.0, 1.0);
    double m = -INFINITY;
    for (const ScaledProfile& s : model.scaled()) m = std::max(m, s.mean + s.sd * z(gen));
    return clamp_negative && m < 0.0 ? 0.0 : m;
}

/// Empirical moments over config.trials trials; trial k uses
/// SplitMix64(derive_seed(config.seed, k)). Bit-identical for any thread count.
SimResult estimate_moments(const PartitionedModel& model, const SimConfig& config);

}  // namespace splitflow
