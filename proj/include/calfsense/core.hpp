#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calfsense/matrix.hpp"

namespace calfsense {

inline constexpr std::size_t kChannels = 16;
inline constexpr double kEpsilonV0 = 1e-6;
inline constexpr double kNominalSampleRateHz = 60.0;
inline constexpr double kDefaultBaselineWindowS = 2.0;

using ChannelArray = std::array<double, kChannels>;

struct SensorFrame {
    std::int64_t timestamp_us = 0;
    ChannelArray volts{};
    std::uint32_t seq = 0;

    friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

// The ten lower-limb motions plus rest. Underlying values index kMotions.
enum class MotionLabel : std::uint8_t { A1, A2, A3, A4, A5, A6, A7, A8, A9, A10, Rest };

inline constexpr std::size_t kMotionCount = 10;
inline constexpr std::array<MotionLabel, kMotionCount> kMotions = {
    MotionLabel::A1, MotionLabel::A2, MotionLabel::A3, MotionLabel::A4, MotionLabel::A5,
    MotionLabel::A6, MotionLabel::A7, MotionLabel::A8, MotionLabel::A9, MotionLabel::A10};

std::string_view to_string(MotionLabel label) noexcept;
std::string_view describe(MotionLabel label) noexcept;
std::optional<MotionLabel> try_parse_motion(std::string_view text) noexcept;
// Throws Error(UnknownMotion).
MotionLabel parse_motion(std::string_view text);

struct Provenance {
    std::string subject;
    MotionLabel motion = MotionLabel::Rest;
    int set_index = 1;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Session {
    std::string subject_id;
    MotionLabel motion = MotionLabel::Rest;
    int set_index = 1;
    std::vector<SensorFrame> frames;
    double sample_rate_hz = kNominalSampleRateHz;

    Provenance provenance() const { return {subject_id, motion, set_index}; }
    double duration_s() const;
};

// Checks ordering, set range, rate and finiteness. Throws Error(InvalidArgument).
void validate_session(const Session& session);

struct BaselineEstimate {
    ChannelArray v0{};
    double window_s = kDefaultBaselineWindowS;
};

struct NormalizedSeries {
    Matrix x;  // rows = samples, cols = kChannels
    std::vector<std::int64_t> timestamps_us;
    double sample_rate_hz = kNominalSampleRateHz;
    Provenance source;

    std::size_t size() const noexcept { return x.rows(); }
    // Seconds since the first sample.
    double time_s(std::size_t index) const noexcept {
        return static_cast<double>(timestamps_us[index] - timestamps_us.front()) * 1e-6;
    }
};

// Mean of each channel over frames whose timestamp lies in the first window_s seconds.
BaselineEstimate estimate_baseline(std::span<const SensorFrame> frames,
                                   double window_s = kDefaultBaselineWindowS);

NormalizedSeries normalize(const Session& session, const BaselineEstimate& baseline);

}  // namespace calfsense
