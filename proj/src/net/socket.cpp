#include "splitflow/net/socket.hpp"

#include "splitflow/error.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <thread>
#include <unistd.h>

namespace splitflow::net {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw IoError(what + ": " + std::strerror(errno));
}

sockaddr_in resolve(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const int rc = ::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res);
    if (rc != 0 || !res) throw IoError("cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
    sockaddr_in addr{};
    std::memcpy(&addr, res->ai_addr, sizeof(addr));
    ::freeaddrinfo(res);
    addr.sin_port = htons(ep.port);
    return addr;
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

int wait_for(int fd, short events, int timeout_ms) {
    pollfd p{fd, events, 0};
    int rc;
    do {
        rc = ::poll(&p, 1, timeout_ms);
    } while (rc < 0 && errno == EINTR);
    if (rc < 0) throw_errno("poll");
    return rc;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
    const auto colon = text.rfind(':');
    Endpoint ep;
    unsigned port = 0;
    if (colon != std::string::npos && colon > 0) {
        const char* b = text.data() + colon + 1;
        const char* e = text.data() + text.size();
        const auto [ptr, ec] = std::from_chars(b, e, port);
        if (ec == std::errc() && ptr == e && b != e && port <= 65535) {
            ep.host = text.substr(0, colon);
            ep.port = static_cast<std::uint16_t>(port);
            return ep;
        }
    }
    throw DomainError("expected host:port (got '" + text + "')");
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

Socket& Socket::operator=(Socket&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
}

void Socket::close() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

Socket listen_tcp(const Endpoint& ep) {
    Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!s) throw_errno("socket");
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    const sockaddr_in addr = resolve(ep);
    if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) throw_errno("bind " + ep.str());
    if (::listen(s.fd(), 8) < 0) throw_errno("listen " + ep.str());
    return s;
}

std::uint16_t local_port(const Socket& s) {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) < 0) throw_errno("getsockname");
    return ntohs(addr.sin_port);
}

Socket accept_one(const Socket& listener, std::chrono::milliseconds timeout) {
    if (wait_for(listener.fd(), POLLIN, static_cast<int>(timeout.count())) == 0)
        throw IoError("timed out waiting for a connection");
    Socket s(::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC));
    if (!s) throw_errno("accept");
    set_nodelay(s.fd());
    return s;
}

Socket connect_tcp(const Endpoint& ep, std::chrono::milliseconds retry_for) {
    const sockaddr_in addr = resolve(ep);
    const auto deadline = Clock::now() + retry_for;
    for (;;) {
        Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
        if (!s) throw_errno("socket");
        if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
            set_nodelay(s.fd());
            return s;
        }
        if ((errno != ECONNREFUSED && errno != EINTR) || Clock::now() >= deadline) throw_errno("connect " + ep.str());
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

void write_all(const Socket& s, std::span<const std::uint8_t> bytes) {
    while (!bytes.empty()) {
        const ssize_t n = ::send(s.fd(), bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("send");
        }
        bytes = bytes.subspan(static_cast<std::size_t>(n));
    }
}

ReadStatus read_exact(const Socket& s, std::span<std::uint8_t> bytes, Clock::time_point deadline) {
    while (!bytes.empty()) {
        const auto left = std::chrono::ceil<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (left <= 0 || wait_for(s.fd(), POLLIN, static_cast<int>(left)) == 0) return ReadStatus::Timeout;
        const ssize_t n = ::recv(s.fd(), bytes.data(), bytes.size(), 0);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            if (errno == ECONNRESET) return ReadStatus::Eof;
            throw_errno("recv");
        }
        if (n == 0) return ReadStatus::Eof;
        bytes = bytes.subspan(static_cast<std::size_t>(n));
    }
    return ReadStatus::Ok;
}

}  // namespace splitflow::net
