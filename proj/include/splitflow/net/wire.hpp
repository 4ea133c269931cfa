#pragma once

// Framing for the two-channel transfer. All integers are big-endian.
//
// data frame:    magic "SPLT" u32 | version u8 | channel u8 | trial u32 |
//                fraction f64 | offset u64 | length u32 | payload
// control:       magic "SPLC" u32 | type u8 | trial u32 | fraction f64 |
//                payload_size u64 | seed u64
//
// Each channel ends a trial with a zero-length frame whose offset field holds
// the CRC32 of the whole payload.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace splitflow::net {

inline constexpr std::uint32_t kFrameMagic = 0x53504C54;
inline constexpr std::uint32_t kControlMagic = 0x53504C43;
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 30;
inline constexpr std::size_t kControlSize = 33;
inline constexpr std::size_t kDefaultChunkSize = 64 * 1024;

inline constexpr std::uint8_t kChannelA = 0;
inline constexpr std::uint8_t kChannelB = 1;

struct FrameHeader {
    std::uint8_t channel = kChannelA;
    std::uint32_t trial_id = 0;
    double fraction = 0.0;
    std::uint64_t offset = 0;
    std::uint32_t length = 0;

    bool terminal() const noexcept { return length == 0; }
    bool operator==(const FrameHeader&) const = default;
};

std::array<std::uint8_t, kFrameHeaderSize> encode_header(const FrameHeader& h);
/// Throws DataError on a bad magic or version.
FrameHeader decode_header(std::span<const std::uint8_t, kFrameHeaderSize> bytes);

enum class ControlType : std::uint8_t { Prepare = 1, Ready = 2, Go = 3, Quit = 4 };

struct ControlMessage {
    ControlType type = ControlType::Quit;
    std::uint32_t trial_id = 0;
    double fraction = 0.0;
    std::uint64_t payload_size = 0;
    std::uint64_t seed = 0;

    bool operator==(const ControlMessage&) const = default;
};

std::array<std::uint8_t, kControlSize> encode_control(const ControlMessage& m);
ControlMessage decode_control(std::span<const std::uint8_t, kControlSize> bytes);

/// IEEE CRC32 (zlib).
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// (round-half-up(f * size), size - that). Throws DomainError for f outside [0, 1].
std::pair<std::uint64_t, std::uint64_t> split_payload(std::uint64_t size, double fraction);

/// Pseudo-random payload bytes determined by seed.
std::vector<std::uint8_t> make_payload(std::size_t size, std::uint64_t seed);

}  // namespace splitflow::net
