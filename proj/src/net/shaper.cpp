#include "splitflow/net/shaper.hpp"

#include "splitflow/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <thread>

namespace splitflow::net {

void ChannelConfig::validate() const {
    if (!std::isfinite(base_delay_ms) || base_delay_ms < 0.0) throw DomainError("base delay must be finite and >= 0");
    if (!std::isfinite(jitter_sigma_ms) || jitter_sigma_ms < 0.0)
        throw DomainError("jitter sigma must be finite and >= 0");
    if (!(rate_limit > 0.0) || !std::isfinite(rate_limit)) throw DomainError("rate limit must be positive");
}

ChannelConfig ChannelConfig::parse(const std::string& text, bool via_relay) {
    ChannelConfig c;
    c.via_relay = via_relay;
    double* fields[] = {&c.base_delay_ms, &c.jitter_sigma_ms, &c.rate_limit};
    const char* p = text.data();
    const char* end = p + text.size();
    bool ok = true;
    for (std::size_t k = 0; k < 3 && ok; ++k) {
        const auto [ptr, ec] = std::from_chars(p, end, *fields[k]);
        ok = ec == std::errc() && ptr != p;
        p = ptr;
        if (k < 2) ok = ok && p != end && *p++ == ':';
    }
    if (!ok || p != end) throw DomainError("channel must be base_ms:jitter_ms:rate_bytes_per_s (got '" + text + "')");
    c.validate();
    return c;
}

Shaper::Shaper(const ChannelConfig& cfg, std::uint64_t seed, Clock::time_point start)
    : cfg_(cfg), gen_(seed), jitter_(cfg.base_delay_ms, cfg.jitter_sigma_ms > 0.0 ? cfg.jitter_sigma_ms : 1.0),
      bucket_(start) {}

void Shaper::pace(std::size_t bytes) {
    const double ms = cfg_.jitter_sigma_ms > 0.0 ? std::max(0.0, jitter_(gen_)) : cfg_.base_delay_ms;
    if (ms > 0.0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
    const auto refill = std::chrono::ceil<Clock::duration>(
        std::chrono::duration<double>(static_cast<double>(bytes) / cfg_.rate_limit));
    const auto ready = std::max(Clock::now(), bucket_ + refill);
    std::this_thread::sleep_until(ready);
    bucket_ = ready;
}

}  // namespace splitflow::net
