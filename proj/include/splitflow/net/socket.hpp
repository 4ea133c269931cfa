#pragma once

// Thin RAII wrapper over blocking TCP sockets with deadline-bounded reads.

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

namespace splitflow::net {

using Clock = std::chrono::steady_clock;

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    /// "host:port"; throws DomainError.
    static Endpoint parse(const std::string& text);
    std::string str() const;
};

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) noexcept : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close(); }

    int fd() const noexcept { return fd_; }
    explicit operator bool() const noexcept { return fd_ >= 0; }
    void close() noexcept;

private:
    int fd_ = -1;
};

/// Bound and listening; port 0 picks a free port.
Socket listen_tcp(const Endpoint& ep);
std::uint16_t local_port(const Socket& s);
Socket accept_one(const Socket& listener, std::chrono::milliseconds timeout);
/// Retries refused connections until retry_for has elapsed.
Socket connect_tcp(const Endpoint& ep, std::chrono::milliseconds retry_for);

/// Throws IoError.
void write_all(const Socket& s, std::span<const std::uint8_t> bytes);

enum class ReadStatus { Ok, Eof, Timeout };
/// Fills bytes completely unless the peer closes or the deadline passes.
ReadStatus read_exact(const Socket& s, std::span<std::uint8_t> bytes, Clock::time_point deadline);

}  // namespace splitflow::net
