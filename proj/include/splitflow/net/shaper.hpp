#pragma once

#include "splitflow/net/socket.hpp"

#include "splitflow/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace splitflow::net {

struct ChannelConfig {
    double base_delay_ms = 0.0;
    double jitter_sigma_ms = 0.0;
    double rate_limit = 1e12;  ///< bytes per second
    bool via_relay = false;

    /// Throws DomainError for negative or non-finite delays or a rate <= 0.
    void validate() const;
    /// "base_ms:jitter_ms:rate_bytes_per_s"
    static ChannelConfig parse(const std::string& text, bool via_relay);
    /// Lower bound set by the rate limit alone.
    double min_transfer_seconds(std::uint64_t bytes) const { return static_cast<double>(bytes) / rate_limit; }
};

/// Per-chunk delay N(base, jitter^2) clamped at 0, followed by a token bucket
/// that starts empty at `start` and holds at most one chunk.
class Shaper {
public:
    Shaper(const ChannelConfig& cfg, std::uint64_t seed, Clock::time_point start);

    /// Blocks until a chunk of this many bytes may leave.
    void pace(std::size_t bytes);

private:
    ChannelConfig cfg_;
    SplitMix64 gen_;
    std::normal_distribution<double> jitter_;
    Clock::time_point bucket_;
};

}  // namespace splitflow::net
