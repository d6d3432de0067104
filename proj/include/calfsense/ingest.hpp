#pragma once

#include <atomic>
#include <cstdint>
#include <functional>

#include "calfsense/core.hpp"
#include "calfsense/net.hpp"
#include "calfsense/wire.hpp"

namespace calfsense {

struct IngestStats {
    std::uint64_t frames_received = 0;  // delivered to the sink
    std::uint64_t frames_dropped = 0;   // missing sequence numbers
    std::uint64_t gaps = 0;             // number of sequence discontinuities
    std::uint64_t crc_failures = 0;
    std::uint64_t version_failures = 0;
    std::uint64_t out_of_range = 0;     // adc counts above full scale
    std::uint64_t out_of_order = 0;     // stale or repeated seq, discarded
    std::uint64_t bytes_discarded = 0;
    std::uint64_t connections = 0;
};

// Tracks seq continuity for one connection.
class SequenceTracker {
public:
    // Returns false if the frame is stale and must be discarded.
    bool accept(std::uint32_t seq, IngestStats& stats) noexcept;

private:
    bool started_ = false;
    std::uint32_t last_ = 0;
};

using FrameSink = std::function<void(const SensorFrame&)>;

struct IngestOptions {
    wire::AdcScale scale{};
    std::size_t queue_capacity = 1024;
    std::size_t max_connections = 1;  // 0 = serve until stop()
};

// Listens on an endpoint and serves one device connection at a time. A socket
// reader thread feeds a bounded queue; the thread calling serve() drains it
// into the sink in seq order.
class IngestServer {
public:
    // Throws Error(BindFailure).
    explicit IngestServer(const net::Endpoint& endpoint);

    std::uint16_t port() const { return listener_.local_port(); }

    // Blocks until max_connections sessions have ended or stop() is called.
    // A broken connection ends its session; frames already received stay in
    // the sink.
    IngestStats serve(const FrameSink& sink, const IngestOptions& options = {});

    void stop() noexcept { stop_.store(true); }

private:
    void serve_connection(net::Socket conn, const FrameSink& sink, const IngestOptions& options,
                          IngestStats& stats);

    net::Socket listener_;
    std::atomic<bool> stop_{false};
};

IngestStats serve_ingest(const net::Endpoint& endpoint, const FrameSink& sink,
                         const IngestOptions& options = {});

}  // namespace calfsense
