#include "splitflow/net/endpoints.hpp"

#include "splitflow/error.hpp"
#include "splitflow/rng.hpp"

#include <algorithm>
#include <optional>
#include <thread>

namespace splitflow::net {

namespace {

constexpr std::uint64_t kShapeA = 0xA;
constexpr std::uint64_t kShapeB = 0xB;
constexpr auto kForever = std::chrono::hours(24 * 365);

std::int64_t ns_of(Clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
}

void send_control(const Socket& s, const ControlMessage& m) {
    const auto bytes = encode_control(m);
    write_all(s, bytes);
}

void send_frame(const Socket& s, const FrameHeader& h, std::span<const std::uint8_t> payload,
                std::vector<std::uint8_t>& scratch) {
    const auto head = encode_header(h);
    scratch.assign(head.begin(), head.end());
    scratch.insert(scratch.end(), payload.begin(), payload.end());
    write_all(s, scratch);
}

// Either kind of message, distinguished by magic.
struct Incoming {
    std::optional<ControlMessage> control;
    FrameHeader frame;
};

ReadStatus read_incoming(const Socket& s, Incoming& in, Clock::time_point deadline) {
    std::array<std::uint8_t, kControlSize> buf{};
    if (const auto st = read_exact(s, std::span(buf).first(4), deadline); st != ReadStatus::Ok) return st;
    const std::uint32_t magic = (std::uint32_t{buf[0]} << 24) | (std::uint32_t{buf[1]} << 16) |
                                (std::uint32_t{buf[2]} << 8) | std::uint32_t{buf[3]};
    if (magic == kControlMagic) {
        if (const auto st = read_exact(s, std::span(buf).subspan(4), deadline); st != ReadStatus::Ok) return st;
        in.control = decode_control(buf);
        return ReadStatus::Ok;
    }
    if (magic != kFrameMagic) throw DataError("stream out of sync");
    const std::span<std::uint8_t, kFrameHeaderSize> head(buf.data(), kFrameHeaderSize);
    if (const auto st = read_exact(s, head.subspan(4), deadline); st != ReadStatus::Ok) return st;
    in.control.reset();
    in.frame = decode_header(head);
    return ReadStatus::Ok;
}

// Writes one channel's share as frames, then the terminal frame.
void stream_channel(const Socket& s, std::uint8_t channel, const ControlMessage& trial,
                    std::span<const std::uint8_t> payload, std::uint64_t first, std::uint64_t count,
                    std::size_t chunk, std::uint32_t crc, Shaper* shaper) {
    std::vector<std::uint8_t> scratch;
    FrameHeader h{channel, trial.trial_id, trial.fraction, 0, 0};
    for (std::uint64_t done = 0; done < count;) {
        const auto len = static_cast<std::uint32_t>(std::min<std::uint64_t>(chunk, count - done));
        h.offset = first + done;
        h.length = len;
        if (shaper) shaper->pace(len);
        send_frame(s, h, payload.subspan(static_cast<std::size_t>(h.offset), len), scratch);
        done += len;
    }
    h.offset = crc;
    h.length = 0;
    send_frame(s, h, {}, scratch);
}

struct ChannelResult {
    TrialStatus status = TrialStatus::Ok;
    std::string detail;
    Clock::time_point last{};
    std::uint64_t received = 0;
    std::uint64_t crc = 0;
};

ChannelResult collect(const Socket& s, std::uint8_t channel, std::uint32_t trial_id, std::span<std::uint8_t> buffer,
                      std::uint64_t first, std::uint64_t count, Clock::time_point deadline) {
    ChannelResult r;
    std::vector<std::uint8_t> discard;
    std::uint64_t next = first;
    const auto fail = [&](TrialStatus st, std::string what) {
        if (r.status == TrialStatus::Ok) {
            r.status = st;
            r.detail = std::move(what);
        }
    };
    for (;;) {
        Incoming in;
        ReadStatus st;
        try {
            st = read_incoming(s, in, deadline);
        } catch (const Error& e) {
            fail(TrialStatus::Connection, e.what());
            return r;
        }
        if (st == ReadStatus::Timeout) {
            fail(TrialStatus::Timeout, "timed out");
            return r;
        }
        if (st == ReadStatus::Eof) {
            fail(TrialStatus::Connection, "connection closed");
            return r;
        }
        if (in.control) continue;
        const FrameHeader& h = in.frame;
        const bool mine = h.trial_id == trial_id;
        std::span<std::uint8_t> dest;
        bool accepted = false;
        if (mine && !h.terminal()) {
            if (h.channel != channel) fail(TrialStatus::Integrity, "frame on the wrong channel");
            else if (h.offset != next || h.offset + h.length > first + count)
                fail(TrialStatus::Integrity, "frame outside the expected byte range");
            else {
                dest = buffer.subspan(static_cast<std::size_t>(h.offset), h.length);
                accepted = true;
            }
        }
        if (!accepted && h.length > 0) {
            discard.resize(h.length);
            dest = discard;
        }
        if (h.length > 0) {
            const ReadStatus ps = read_exact(s, dest, deadline);
            if (ps != ReadStatus::Ok) {
                fail(ps == ReadStatus::Timeout ? TrialStatus::Timeout : TrialStatus::Connection, "truncated frame");
                return r;
            }
            if (accepted) {
                next += h.length;
                r.received += h.length;
            }
        }
        if (mine && h.terminal()) {
            r.last = Clock::now();
            r.crc = h.offset;
            return r;
        }
    }
}

}  // namespace

std::string_view to_string(TrialStatus s) {
    switch (s) {
        case TrialStatus::Ok: return "ok";
        case TrialStatus::Timeout: return "timeout";
        case TrialStatus::Integrity: return "integrity";
        case TrialStatus::Connection: return "connection";
    }
    return "unknown";
}

std::uint64_t payload_seed(std::uint64_t seed, std::uint32_t trial_id) { return derive_seed(seed, trial_id); }

void run_sender(const Socket& direct, const Socket& relay_in, const SenderOptions& opts) {
    opts.channel_a.validate();
    if (opts.chunk_size == 0 || opts.chunk_size > 0xFFFFFFFFu) throw DomainError("chunk size out of range");
    std::vector<std::uint8_t> payload;
    ControlMessage trial;
    std::uint32_t crc = 0;
    bool prepared = false;
    for (;;) {
        Incoming in;
        if (read_incoming(direct, in, Clock::now() + kForever) != ReadStatus::Ok) return;
        if (!in.control) throw DataError("sender received a data frame");
        const ControlMessage& m = *in.control;
        if (m.type == ControlType::Quit) return;
        if (m.type == ControlType::Prepare) {
            trial = m;
            payload = make_payload(static_cast<std::size_t>(m.payload_size), payload_seed(m.seed, m.trial_id));
            crc = crc32(payload);
            prepared = true;
            ControlMessage ready = m;
            ready.type = ControlType::Ready;
            send_control(direct, ready);
        } else if (m.type == ControlType::Go) {
            if (!prepared || m.trial_id != trial.trial_id) throw DataError("GO without a matching PREPARE");
            prepared = false;
            const auto [bytes_a, bytes_b] = split_payload(trial.payload_size, trial.fraction);
            // B goes out unshaped; the relay applies its profile.
            // A write error means the receiver went away; stop serving.
            bool lost = false;
            {
                std::jthread b([&, bytes_a = bytes_a, bytes_b = bytes_b] {
                    try {
                        stream_channel(relay_in, kChannelB, trial, payload, bytes_a, bytes_b, opts.chunk_size, crc,
                                       nullptr);
                    } catch (const IoError&) {
                        lost = true;
                    }
                });
                Shaper shaper(opts.channel_a, derive_seed(derive_seed(trial.seed, trial.trial_id), kShapeA),
                              Clock::now());
                try {
                    stream_channel(direct, kChannelA, trial, payload, 0, bytes_a, opts.chunk_size, crc, &shaper);
                } catch (const IoError&) {
                    return;
                }
            }
            if (lost) return;
        }
    }
}

void run_relay(const Socket& upstream, const Socket& downstream, const RelayOptions& opts) {
    opts.channel_b.validate();
    std::optional<Shaper> shaper;
    std::optional<std::uint32_t> current;
    std::vector<std::uint8_t> payload;
    std::vector<std::uint8_t> scratch;
    for (;;) {
        Incoming in;
        if (read_incoming(upstream, in, Clock::now() + kForever) != ReadStatus::Ok) return;
        if (in.control) continue;
        const FrameHeader& h = in.frame;
        payload.resize(h.length);
        if (h.length > 0 && read_exact(upstream, payload, Clock::now() + kForever) != ReadStatus::Ok) return;
        if (current != h.trial_id) {
            current = h.trial_id;
            shaper.emplace(opts.channel_b, derive_seed(derive_seed(opts.seed, h.trial_id), kShapeB), Clock::now());
        }
        if (!h.terminal()) shaper->pace(h.length);
        try {
            send_frame(downstream, h, payload, scratch);
        } catch (const IoError&) {
            return;
        }
    }
}

TrialRecord Receiver::run_trial(double fraction, std::uint64_t payload_size, std::uint32_t trial_id,
                                std::uint64_t seed, std::chrono::milliseconds timeout) {
    TrialRecord rec;
    rec.trial_id = trial_id;
    rec.fraction = fraction;
    std::tie(rec.bytes_a, rec.bytes_b) = split_payload(payload_size, fraction);
    const auto fail = [&](TrialStatus st, std::string detail) {
        rec.status = st;
        rec.detail = std::move(detail);
        return rec;
    };
    if (broken_) return fail(TrialStatus::Connection, "connection lost in an earlier trial");

    const ControlMessage prepare{ControlType::Prepare, trial_id, fraction, payload_size, seed};
    try {
        send_control(direct_, prepare);
        // Skip leftovers of an abandoned trial until READY shows up.
        const auto ready_deadline = Clock::now() + timeout;
        std::vector<std::uint8_t> discard;
        for (;;) {
            Incoming in;
            const ReadStatus st = read_incoming(direct_, in, ready_deadline);
            if (st == ReadStatus::Timeout) return fail(TrialStatus::Timeout, "no READY from sender");
            if (st == ReadStatus::Eof) {
                broken_ = true;
                return fail(TrialStatus::Connection, "sender closed the connection");
            }
            if (in.control) {
                if (in.control->type == ControlType::Ready && in.control->trial_id == trial_id) break;
                continue;
            }
            discard.resize(in.frame.length);
            if (read_exact(direct_, discard, ready_deadline) != ReadStatus::Ok)
                return fail(TrialStatus::Timeout, "stale frame truncated");
        }
    } catch (const Error& e) {
        broken_ = true;
        return fail(TrialStatus::Connection, e.what());
    }

    buffer_.assign(static_cast<std::size_t>(payload_size), 0);
    ChannelResult ra;
    ChannelResult rb;
    const auto t_request = Clock::now();
    const auto deadline = t_request + timeout;
    {
        const auto guarded = [](auto&& fn) {
            try {
                return fn();
            } catch (const std::exception& e) {
                return ChannelResult{TrialStatus::Connection, e.what(), {}, 0, 0};
            }
        };
        std::jthread a([&] {
            ra = guarded([&] { return collect(direct_, kChannelA, trial_id, buffer_, 0, rec.bytes_a, deadline); });
        });
        std::jthread b([&] {
            rb = guarded(
                [&] { return collect(relay_out_, kChannelB, trial_id, buffer_, rec.bytes_a, rec.bytes_b, deadline); });
        });
        try {
            send_control(direct_, ControlMessage{ControlType::Go, trial_id, fraction, payload_size, seed});
        } catch (const Error&) {
            // readers run into the deadline or EOF and report it
        }
    }
    rec.t_request_ns = ns_of(t_request);
    for (const ChannelResult* r : {&ra, &rb}) {
        if (r->status == TrialStatus::Connection) broken_ = true;
        if (r->status != TrialStatus::Ok) return fail(r->status, r->detail);
    }
    if (ra.received != rec.bytes_a || rb.received != rec.bytes_b) return fail(TrialStatus::Integrity, "short payload");
    const std::uint32_t crc = crc32(buffer_);
    if (ra.crc != crc || rb.crc != crc) return fail(TrialStatus::Integrity, "CRC mismatch");

    const auto last = std::max(ra.last, rb.last);
    rec.t_last_packet_ns = ns_of(last);
    rec.completion_ns = rec.t_last_packet_ns - rec.t_request_ns;
    return rec;
}

void Receiver::shutdown() noexcept {
    if (!direct_) return;
    try {
        send_control(direct_, ControlMessage{ControlType::Quit, 0, 0.0, 0, 0});
    } catch (const Error&) {
    }
    direct_.close();
    relay_out_.close();
}

}  // namespace splitflow::net
