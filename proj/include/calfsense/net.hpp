#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>

namespace calfsense::net {

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    // Accepts "host:port". Throws Error(InvalidArgument).
    static Endpoint parse(const std::string& text);
    std::string to_string() const;
};

// Owning file descriptor for a TCP socket.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) noexcept : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(other.release()) {}
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    int release() noexcept;
    void close() noexcept;

    // Throws BindFailure.
    static Socket listen_on(const Endpoint& endpoint, int backlog = 1);
    // Throws ConnectionRefused.
    static Socket connect_to(const Endpoint& endpoint);

    std::uint16_t local_port() const;
    void set_send_timeout(std::chrono::milliseconds timeout);

    // Sends every byte. Throws BackpressureTimeout if the peer stops reading
    // for longer than the send timeout, ConnectionError on other failures.
    void send_all(std::span<const std::uint8_t> bytes);
    // Returns bytes read, 0 on orderly shutdown. Throws ConnectionError.
    std::size_t receive(std::span<std::uint8_t> buffer);
    // Waits up to timeout for readability; false on timeout.
    bool wait_readable(std::chrono::milliseconds timeout) const;

private:
    int fd_ = -1;
};

}  // namespace calfsense::net
