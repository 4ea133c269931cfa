#include "splitflow/net/wire.hpp"

#include "splitflow/error.hpp"
#include "splitflow/rng.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

namespace splitflow::net {

namespace {

template <typename T>
std::uint8_t* put(std::uint8_t* p, T v) {
    for (int s = static_cast<int>(sizeof(T)) - 1; s >= 0; --s) *p++ = static_cast<std::uint8_t>(v >> (8 * s));
    return p;
}

template <typename T>
const std::uint8_t* get(const std::uint8_t* p, T& v) {
    v = 0;
    for (std::size_t s = 0; s < sizeof(T); ++s) v = static_cast<T>((v << 8) | p[s]);
    return p + sizeof(T);
}

}  // namespace

std::array<std::uint8_t, kFrameHeaderSize> encode_header(const FrameHeader& h) {
    std::array<std::uint8_t, kFrameHeaderSize> out{};
    std::uint8_t* p = out.data();
    p = put(p, kFrameMagic);
    p = put(p, kWireVersion);
    p = put(p, h.channel);
    p = put(p, h.trial_id);
    p = put(p, std::bit_cast<std::uint64_t>(h.fraction));
    p = put(p, h.offset);
    put(p, h.length);
    return out;
}

FrameHeader decode_header(std::span<const std::uint8_t, kFrameHeaderSize> bytes) {
    const std::uint8_t* p = bytes.data();
    std::uint32_t magic = 0;
    std::uint8_t version = 0;
    std::uint64_t fbits = 0;
    FrameHeader h;
    p = get(p, magic);
    p = get(p, version);
    if (magic != kFrameMagic) throw DataError("bad frame magic");
    if (version != kWireVersion) throw DataError("unsupported frame version " + std::to_string(version));
    p = get(p, h.channel);
    p = get(p, h.trial_id);
    p = get(p, fbits);
    p = get(p, h.offset);
    get(p, h.length);
    h.fraction = std::bit_cast<double>(fbits);
    return h;
}

std::array<std::uint8_t, kControlSize> encode_control(const ControlMessage& m) {
    std::array<std::uint8_t, kControlSize> out{};
    std::uint8_t* p = out.data();
    p = put(p, kControlMagic);
    p = put(p, static_cast<std::uint8_t>(m.type));
    p = put(p, m.trial_id);
    p = put(p, std::bit_cast<std::uint64_t>(m.fraction));
    p = put(p, m.payload_size);
    put(p, m.seed);
    return out;
}

ControlMessage decode_control(std::span<const std::uint8_t, kControlSize> bytes) {
    const std::uint8_t* p = bytes.data();
    std::uint32_t magic = 0;
    std::uint8_t type = 0;
    std::uint64_t fbits = 0;
    ControlMessage m;
    p = get(p, magic);
    if (magic != kControlMagic) throw DataError("bad control magic");
    p = get(p, type);
    if (type < 1 || type > 4) throw DataError("unknown control message type " + std::to_string(type));
    m.type = static_cast<ControlType>(type);
    p = get(p, m.trial_id);
    p = get(p, fbits);
    p = get(p, m.payload_size);
    get(p, m.seed);
    m.fraction = std::bit_cast<double>(fbits);
    return m;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths
    while (!bytes.empty()) {
        const std::size_t n = std::min<std::size_t>(bytes.size(), 1u << 30);
        crc = ::crc32(crc, bytes.data(), static_cast<uInt>(n));
        bytes = bytes.subspan(n);
    }
    return static_cast<std::uint32_t>(crc);
}

std::pair<std::uint64_t, std::uint64_t> split_payload(std::uint64_t size, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        std::ostringstream msg;
        msg << "fraction must lie in [0, 1] (got " << fraction << ")";
        throw DomainError(msg.str());
    }
    const double a = std::floor(fraction * static_cast<double>(size) + 0.5);
    const auto bytes_a = std::min(size, static_cast<std::uint64_t>(a));
    return {bytes_a, size - bytes_a};
}

std::vector<std::uint8_t> make_payload(std::size_t size, std::uint64_t seed) {
    std::vector<std::uint8_t> out(size);
    SplitMix64 gen(seed);
    std::size_t i = 0;
    for (; i + 8 <= size; i += 8) {
        const std::uint64_t v = gen();
        std::memcpy(out.data() + i, &v, 8);
    }
    if (i < size) {
        const std::uint64_t v = gen();
        std::memcpy(out.data() + i, &v, size - i);
    }
    return out;
}

}  // namespace splitflow::net
