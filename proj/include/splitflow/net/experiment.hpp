#pragma once

#include "splitflow/estimator.hpp"
#include "splitflow/net/endpoints.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <sys/types.h>
#include <vector>

namespace splitflow::net {

struct NetExperimentConfig {
    ChannelConfig channel_a;                      ///< direct
    ChannelConfig channel_b{0.0, 0.0, 1e12, true};  ///< through the relay
    std::uint64_t payload_size = 1 << 20;
    std::vector<double> f_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t trials_per_f = 50;
    std::uint64_t seed = 0;
    bool randomize_order = true;
    std::chrono::milliseconds timeout{60'000};
    std::size_t chunk_size = kDefaultChunkSize;
    double max_failure_rate = 0.1;

    /// Throws DomainError; channel A must be direct and channel B relayed.
    void validate() const;
};

/// Completion-time summary for one grid value, in seconds.
struct FractionSummary {
    double fraction = 0.0;
    std::size_t ok_trials = 0;
    std::optional<FitReport> fit;  ///< absent with fewer than two good trials
};

struct NetExperimentResult {
    std::vector<TrialRecord> records;  ///< execution order
    std::vector<FractionSummary> per_f;  ///< grid order
    std::size_t failures = 0;
};

/// Relay and sender as child processes on loopback, wired to an in-process
/// receiver. Children are stopped and reaped on destruction.
class LoopbackRig {
public:
    explicit LoopbackRig(const NetExperimentConfig& cfg);
    ~LoopbackRig();
    LoopbackRig(const LoopbackRig&) = delete;
    LoopbackRig& operator=(const LoopbackRig&) = delete;

    Receiver& receiver() { return *receiver_; }

private:
    std::optional<Receiver> receiver_;
    std::vector<pid_t> children_;
};

TrialRecord run_trial(Receiver& rx, const NetExperimentConfig& cfg, double fraction, std::uint32_t trial_id);

/// trials_per_f trials per grid value, sequentially. Throws IoError when the
/// failure rate exceeds cfg.max_failure_rate.
NetExperimentResult run_experiment(Receiver& rx, const NetExperimentConfig& cfg);
NetExperimentResult run_loopback_experiment(const NetExperimentConfig& cfg);

std::vector<FractionSummary> summarize(const std::vector<TrialRecord>& records, const std::vector<double>& grid);

}  // namespace splitflow::net
