#pragma once

// The three roles of the loopback transfer.
//
//   sender --direct--------------------------> receiver   (channel A)
//   sender --relay-in--> relay --relay-out---> receiver   (channel B)
//
// The receiver drives each trial over the direct connection: PREPARE, the
// sender answers READY once the payload is built, then GO starts the clock.
// The sender shapes channel A itself; the relay shapes channel B.

#include "splitflow/net/shaper.hpp"
#include "splitflow/net/socket.hpp"
#include "splitflow/net/wire.hpp"

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace splitflow::net {

struct SenderOptions {
    ChannelConfig channel_a;
    std::size_t chunk_size = kDefaultChunkSize;
};

/// Serves trials until QUIT or the receiver disconnects.
void run_sender(const Socket& direct, const Socket& relay_in, const SenderOptions& opts);

struct RelayOptions {
    ChannelConfig channel_b{0.0, 0.0, 1e12, true};
    std::uint64_t seed = 0;  ///< experiment seed; shaping is reseeded per trial
};

/// Forwards frames until the upstream side closes.
void run_relay(const Socket& upstream, const Socket& downstream, const RelayOptions& opts);

enum class TrialStatus { Ok, Timeout, Integrity, Connection };
std::string_view to_string(TrialStatus s);

struct TrialRecord {
    std::uint32_t trial_id = 0;
    double fraction = 0.0;
    std::int64_t t_request_ns = 0;      ///< steady clock
    std::int64_t t_last_packet_ns = 0;  ///< steady clock
    std::int64_t completion_ns = 0;
    std::uint64_t bytes_a = 0;
    std::uint64_t bytes_b = 0;
    TrialStatus status = TrialStatus::Ok;
    std::string detail;

    bool ok() const noexcept { return status == TrialStatus::Ok; }
    double completion_seconds() const noexcept { return static_cast<double>(completion_ns) * 1e-9; }
};

class Receiver {
public:
    Receiver(Socket direct, Socket relay_out) : direct_(std::move(direct)), relay_out_(std::move(relay_out)) {}

    /// One trial; failures come back in the record, never as exceptions.
    TrialRecord run_trial(double fraction, std::uint64_t payload_size, std::uint32_t trial_id, std::uint64_t seed,
                          std::chrono::milliseconds timeout);
    /// Tells the sender to stop; safe to call more than once.
    void shutdown() noexcept;

    /// Bytes reassembled by the most recent trial.
    const std::vector<std::uint8_t>& last_payload() const noexcept { return buffer_; }

private:
    Socket direct_;
    Socket relay_out_;
    std::vector<std::uint8_t> buffer_;
    bool broken_ = false;
};

/// Payload of a trial as generated by the sender.
std::uint64_t payload_seed(std::uint64_t seed, std::uint32_t trial_id);

}  // namespace splitflow::net
