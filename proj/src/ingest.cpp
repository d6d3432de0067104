#include "calfsense/ingest.hpp"

#include <sys/socket.h>

#include <array>
#include <thread>
#include <vector>

#include "calfsense/bounded_queue.hpp"
#include "calfsense/error.hpp"

namespace calfsense {

using namespace std::chrono_literals;

bool SequenceTracker::accept(std::uint32_t seq, IngestStats& stats) noexcept {
    if (!started_) {
        started_ = true;
        last_ = seq;
        return true;
    }
    if (seq <= last_) {
        ++stats.out_of_order;
        return false;
    }
    if (seq != last_ + 1) {
        ++stats.gaps;
        stats.frames_dropped += seq - last_ - 1;
    }
    last_ = seq;
    return true;
}

IngestServer::IngestServer(const net::Endpoint& endpoint)
    : listener_(net::Socket::listen_on(endpoint)) {}

IngestStats IngestServer::serve(const FrameSink& sink, const IngestOptions& options) {
    IngestStats stats;
    while (!stop_.load()) {
        if (options.max_connections != 0 && stats.connections >= options.max_connections) break;
        if (!listener_.wait_readable(100ms)) continue;
        const int fd = ::accept(listener_.fd(), nullptr, nullptr);
        if (fd < 0) continue;
        ++stats.connections;
        serve_connection(net::Socket(fd), sink, options, stats);
    }
    return stats;
}

void IngestServer::serve_connection(net::Socket conn, const FrameSink& sink,
                                    const IngestOptions& options, IngestStats& stats) {
    BoundedQueue<wire::WireFrame> queue(options.queue_capacity);
    wire::ReassemblyStats reassembly;
    std::atomic<bool> abort{false};

    std::thread reader([&] {
        wire::FrameReassembler reassembler;
        std::array<std::uint8_t, 4096> buffer{};
        std::vector<wire::WireFrame> decoded;
        try {
            bool open = true;
            while (open && !stop_.load() && !abort.load()) {
                if (!conn.wait_readable(100ms)) continue;
                const std::size_t n = conn.receive(buffer);
                if (n == 0) break;
                decoded.clear();
                reassembler.feed(std::span(buffer).first(n), decoded);
                for (auto& f : decoded) {
                    if (!queue.push(f)) {
                        open = false;
                        break;
                    }
                }
            }
        } catch (const Error&) {
            // Connection failure ends the session; queued frames are still drained.
        }
        reassembly = reassembler.stats();
        queue.close();
    });

    SequenceTracker tracker;
    try {
        while (auto frame = queue.pop()) {
            if (!tracker.accept(frame->seq, stats)) continue;
            bool in_range = true;
            for (auto count : frame->adc) {
                if (count > options.scale.full_scale) in_range = false;
            }
            if (!in_range) {
                ++stats.out_of_range;
                continue;
            }
            sink(wire::to_sensor_frame(*frame, options.scale));
            ++stats.frames_received;
        }
    } catch (...) {
        abort.store(true);
        queue.close();
        reader.join();
        throw;
    }
    reader.join();

    stats.crc_failures += reassembly.crc_failures;
    stats.version_failures += reassembly.version_failures;
    stats.bytes_discarded += reassembly.bytes_discarded;
}

IngestStats serve_ingest(const net::Endpoint& endpoint, const FrameSink& sink,
                         const IngestOptions& options) {
    IngestServer server(endpoint);
    return server.serve(sink, options);
}

}  // namespace calfsense
