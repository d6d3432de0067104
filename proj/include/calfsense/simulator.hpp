#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "calfsense/core.hpp"
#include "calfsense/net.hpp"
#include "calfsense/wire.hpp"

namespace calfsense::sim {

// Sponge sensor response: steep below the knee, shallow above, then saturating.
struct PressureModel {
    double knee_kpa = 10.0;
    double s_low = 0.02;   // relative change per kPa below the knee
    double s_high = 0.005;
    double saturation = 0.5;

    void validate() const;  // throws InvalidArgument
};

// Throws NegativePressure for p_kpa < 0.
double pressure_to_relative(double p_kpa, const PressureModel& model);

struct MotionProfile {
    MotionLabel label = MotionLabel::A1;
    std::array<double, kChannels> spatial_gain{};
    double duty = 0.5;         // active fraction of each repetition
    double edge_s = 0.1;       // raised-cosine rise and fall time
    double rep_hz = 0.5;
    double amplitude_kpa = 10.0;
    double tonic_kpa = 0.0;    // held pressure while the motion is performed
};

// Built-in profiles for A1..A10. Throws UnknownMotion for Rest.
const MotionProfile& default_profile(MotionLabel motion);

struct SimConfig {
    int subjects = 10;
    int sets_per_motion = 4;
    double trial_s = 90.0;
    double sample_rate_hz = kNominalSampleRateHz;
    double noise_sigma = 0.02;          // relative units
    double drift_per_s = 0.0001;        // volts per second
    double subject_scale_sigma = 0.15;  // log-normal amplitude spread between subjects
    double gain_jitter = 0.05;          // per-subject, per-channel
    double set_jitter = 0.05;           // per-set amplitude
    double burst_jitter = 0.05;         // per-burst amplitude
    double timing_jitter_s = 0.05;
    double preamble_s = kDefaultBaselineWindowS;
    double v0 = 1.0;
    PressureModel pressure;
    std::uint64_t seed = 0;

    void validate() const;  // throws InvalidArgument
};

struct Burst {
    double onset_s = 0.0;
    double duration_s = 0.0;
    double amplitude_kpa = 0.0;
};

struct GroundTruth {
    std::vector<Burst> bursts;
    double duty = 0.0;
    double cycle_s = 0.0;
    std::optional<double> shake_s;
    std::optional<double> loss_s;
};

struct Synthesized {
    Session session;
    GroundTruth truth;
};

// "S01" for subject 1.
std::string subject_name(int subject);

// Subjects and sets count from 1. Rest yields noise and drift only.
Synthesized synth_session(MotionLabel motion, int subject, int set_index, const SimConfig& cfg);

enum class Scenario { Gait, ChairStand, Tandem };
std::string_view to_string(Scenario s) noexcept;
std::optional<Scenario> parse_scenario(std::string_view text) noexcept;

struct GaitParams {
    double cycle_s = 1.2;
    double duty = 0.6;
    double walk_s = 30.0;
    double amplitude_kpa = 8.0;  // stays under the knee so edges are symmetric
    double edge_s = 0.1;
    double lead_s = 0.5;  // quiet standing between the preamble and the first step
    MotionLabel profile = MotionLabel::A9;
};

struct ChairStandParams {
    int repetitions = 12;
    double test_s = 30.0;
    double burst_s = 1.0;
    double amplitude_kpa = 20.0;
    double jitter_s = 0.1;
    double tail_s = 2.0;
    MotionLabel profile = MotionLabel::A4;
};

struct TandemParams {
    double shake_s = 8.0;
    std::optional<double> loss_s = 12.0;
    double duration_s = 16.0;
    double shake_hz = 2.0;
    double shake_kpa = 4.5;
    double loss_kpa = 15.0;
    MotionLabel profile = MotionLabel::A6;
};

struct HealthParams {
    GaitParams gait;
    ChairStandParams chair;
    TandemParams tandem;
};

// Throws InvalidScenarioParams. Chair-stand bursts start after the preamble;
// the tandem hold starts at t = 0 and doubles as the rest segment.
Synthesized synth_health(Scenario scenario, const HealthParams& params, const SimConfig& cfg);

struct StreamStats {
    std::uint64_t frames_sent = 0;
    std::uint64_t bytes_sent = 0;
    double elapsed_s = 0.0;
};

// Quantizes to ADC counts and sends one frame per sample period divided by
// rate_multiplier. Errors: ConnectionRefused, BackpressureTimeout.
StreamStats stream_session(const Session& session, const net::Endpoint& endpoint,
                           double rate_multiplier, const wire::AdcScale& scale = {},
                           std::chrono::milliseconds send_timeout = std::chrono::seconds(5));

struct DatasetEntry {
    std::string file;
    std::string subject;
    MotionLabel motion = MotionLabel::A1;
    int set_index = 1;
    std::size_t frames = 0;
    double sample_rate_hz = kNominalSampleRateHz;
};

// subject_motion_set.csv per session plus manifest.csv and ground_truth.csv.
// Throws IoError.
std::vector<DatasetEntry> export_dataset(const std::filesystem::path& dir, const SimConfig& cfg);
void write_ground_truth(const GroundTruth& truth, std::ostream& out);

}  // namespace calfsense::sim
