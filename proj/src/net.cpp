#include "calfsense/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "calfsense/error.hpp"

namespace calfsense::net {

namespace {

sockaddr_in resolve(const Endpoint& endpoint) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(endpoint.port);
    const std::string host = endpoint.host.empty() || endpoint.host == "*" ? "0.0.0.0"
                             : endpoint.host == "localhost"              ? "127.0.0.1"
                                                                         : endpoint.host;
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || result == nullptr) {
        throw Error(Errc::InvalidArgument, "cannot resolve host '" + endpoint.host + "'");
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(result->ai_addr)->sin_addr;
    ::freeaddrinfo(result);
    return addr;
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) {
        throw Error(Errc::InvalidArgument, "endpoint '" + text + "' is not host:port");
    }
    Endpoint ep;
    ep.host = text.substr(0, colon);
    const std::string port_text = text.substr(colon + 1);
    unsigned value = 0;
    const auto [ptr, ec] =
        std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
    if (ec != std::errc() || ptr != port_text.data() + port_text.size() || value > 65535) {
        throw Error(Errc::InvalidArgument, "bad port in endpoint '" + text + "'");
    }
    ep.port = static_cast<std::uint16_t>(value);
    return ep;
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.release();
    }
    return *this;
}

Socket::~Socket() { close(); }

int Socket::release() noexcept {
    const int fd = fd_;
    fd_ = -1;
    return fd;
}

void Socket::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

Socket Socket::listen_on(const Endpoint& endpoint, int backlog) {
    Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock.valid()) throw Error(Errc::BindFailure, "socket(): " + errno_text());
    const int yes = 1;
    ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    try {
        addr = resolve(endpoint);
    } catch (const Error& e) {
        throw Error(Errc::BindFailure, e.what());
    }
    if (::bind(sock.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        throw Error(Errc::BindFailure, "bind " + endpoint.to_string() + ": " + errno_text());
    }
    if (::listen(sock.fd(), backlog) != 0) {
        throw Error(Errc::BindFailure, "listen " + endpoint.to_string() + ": " + errno_text());
    }
    return sock;
}

Socket Socket::connect_to(const Endpoint& endpoint) {
    const sockaddr_in addr = resolve(endpoint);
    Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock.valid()) throw Error(Errc::ConnectionRefused, "socket(): " + errno_text());
    if (::connect(sock.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        throw Error(Errc::ConnectionRefused, "connect " + endpoint.to_string() + ": " + errno_text());
    }
    const int yes = 1;
    ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
    return sock;
}

std::uint16_t Socket::local_port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return 0;
    return ntohs(addr.sin_port);
}

void Socket::set_send_timeout(std::chrono::milliseconds timeout) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void Socket::send_all(std::span<const std::uint8_t> bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n > 0) {
            sent += static_cast<std::size_t>(n);
            continue;
        }
        if (n < 0 && errno == EINTR) continue;
        if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
            throw Error(Errc::BackpressureTimeout, "peer stopped reading");
        }
        throw Error(Errc::ConnectionError, "send: " + errno_text());
    }
}

std::size_t Socket::receive(std::span<std::uint8_t> buffer) {
    while (true) {
        const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), 0);
        if (n >= 0) return static_cast<std::size_t>(n);
        if (errno == EINTR) continue;
        throw Error(Errc::ConnectionError, "recv: " + errno_text());
    }
}

bool Socket::wait_readable(std::chrono::milliseconds timeout) const {
    pollfd pfd{fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    return rc > 0;
}

}  // namespace calfsense::net
