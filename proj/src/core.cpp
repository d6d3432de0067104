#include "calfsense/core.hpp"

#include <cmath>
#include <string>

#include "calfsense/error.hpp"

namespace calfsense {

namespace {

constexpr std::array<std::string_view, 11> kLabelNames = {
    "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "REST"};

constexpr std::array<std::string_view, 11> kLabelDescriptions = {
    "lift heel",
    "lift toes",
    "foot inversion",
    "stretch leg forward",
    "stretch leg backward",
    "standing with foot inversion",
    "turn round",
    "step in situ",
    "walk forward",
    "walk backward",
    "rest"};

}  // namespace

std::string_view to_string(MotionLabel label) noexcept {
    return kLabelNames[static_cast<std::size_t>(label)];
}

std::string_view describe(MotionLabel label) noexcept {
    return kLabelDescriptions[static_cast<std::size_t>(label)];
}

std::optional<MotionLabel> try_parse_motion(std::string_view text) noexcept {
    for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
        if (text == kLabelNames[i] || text == kLabelDescriptions[i]) {
            return static_cast<MotionLabel>(i);
        }
    }
    return std::nullopt;
}

MotionLabel parse_motion(std::string_view text) {
    if (auto label = try_parse_motion(text)) return *label;
    throw Error(Errc::UnknownMotion, "unknown motion label '" + std::string(text) + "'");
}

double Session::duration_s() const {
    if (frames.size() < 2) return 0.0;
    return static_cast<double>(frames.back().timestamp_us - frames.front().timestamp_us) * 1e-6;
}

void validate_session(const Session& session) {
    if (session.set_index < 1 || session.set_index > 4) {
        throw Error(Errc::InvalidArgument,
                    "set_index must be in 1..4, got " + std::to_string(session.set_index));
    }
    if (!(session.sample_rate_hz > 0.0) || !std::isfinite(session.sample_rate_hz)) {
        throw Error(Errc::InvalidArgument, "sample_rate_hz must be positive");
    }
    for (std::size_t i = 0; i < session.frames.size(); ++i) {
        const auto& f = session.frames[i];
        if (i > 0 && f.timestamp_us < session.frames[i - 1].timestamp_us) {
            throw Error(Errc::InvalidArgument,
                        "timestamps decrease at frame " + std::to_string(i));
        }
        for (double v : f.volts) {
            if (!std::isfinite(v)) {
                throw Error(Errc::InvalidArgument,
                            "non-finite voltage at frame " + std::to_string(i));
            }
        }
    }
}

BaselineEstimate estimate_baseline(std::span<const SensorFrame> frames, double window_s) {
    if (!(window_s > 0.0)) {
        throw Error(Errc::InvalidArgument, "baseline window must be positive");
    }
    if (frames.empty()) {
        throw Error(Errc::InsufficientData, "no frames to estimate a baseline from");
    }
    const std::int64_t t0 = frames.front().timestamp_us;
    const auto window_us = static_cast<std::int64_t>(std::llround(window_s * 1e6));
    if (frames.back().timestamp_us - t0 < window_us) {
        throw Error(Errc::InsufficientData,
                    "frames span " +
                        std::to_string(static_cast<double>(frames.back().timestamp_us - t0) * 1e-6) +
                        " s, baseline needs " + std::to_string(window_s) + " s");
    }

    // Closed interval [t0, t0 + window]: a linear ramp averages to its midpoint.
    ChannelArray sum{};
    std::size_t count = 0;
    for (const auto& f : frames) {
        if (f.timestamp_us - t0 > window_us) break;
        for (std::size_t c = 0; c < kChannels; ++c) sum[c] += f.volts[c];
        ++count;
    }

    BaselineEstimate est;
    est.window_s = window_s;
    for (std::size_t c = 0; c < kChannels; ++c) {
        est.v0[c] = sum[c] / static_cast<double>(count);
        if (!std::isfinite(est.v0[c]) || std::abs(est.v0[c]) <= kEpsilonV0) {
            throw Error(Errc::DegenerateBaseline,
                        "channel ch" + std::to_string(c + 1) + " baseline " +
                            std::to_string(est.v0[c]) + " V is too close to zero");
        }
    }
    return est;
}

NormalizedSeries normalize(const Session& session, const BaselineEstimate& baseline) {
    for (std::size_t c = 0; c < kChannels; ++c) {
        if (!std::isfinite(baseline.v0[c]) || std::abs(baseline.v0[c]) <= kEpsilonV0) {
            throw Error(Errc::DegenerateBaseline,
                        "channel ch" + std::to_string(c + 1) + " baseline is degenerate");
        }
    }

    NormalizedSeries out;
    out.sample_rate_hz = session.sample_rate_hz;
    out.source = session.provenance();
    out.x = Matrix(session.frames.size(), kChannels);
    out.timestamps_us.reserve(session.frames.size());
    for (std::size_t t = 0; t < session.frames.size(); ++t) {
        const auto& f = session.frames[t];
        auto row = out.x.row(t);
        for (std::size_t c = 0; c < kChannels; ++c) {
            row[c] = (f.volts[c] - baseline.v0[c]) / baseline.v0[c];
        }
        out.timestamps_us.push_back(f.timestamp_us);
    }
    return out;
}

}  // namespace calfsense
