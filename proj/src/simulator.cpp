#include "calfsense/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "calfsense/csv_io.hpp"
#include "calfsense/error.hpp"
#include "calfsense/seed.hpp"

namespace calfsense::sim {

namespace {

// Channel gains per motion, ch05 (index 4) dominant. Rows follow A1..A10.
constexpr double kGain[kMotionCount][kChannels] = {
    {0.21, 0.11, 0.61, 0.61, 1.00, 0.78, 0.19, 0.13, 0.58, 0.28, 0.35, 0.78, 0.78, 0.78, 0.55, 0.15},
    {0.28, 0.14, 0.56, 0.10, 1.00, 0.51, 0.60, 0.82, 0.40, 0.51, 0.54, 0.75, 0.07, 0.26, 0.22, 0.79},
    {0.65, 0.58, 0.64, 0.76, 1.00, 0.15, 0.83, 0.34, 0.23, 0.08, 0.62, 0.77, 0.51, 0.70, 0.38, 0.43},
    {0.71, 0.54, 0.83, 0.13, 1.00, 0.78, 0.10, 0.53, 0.58, 0.55, 0.18, 0.14, 0.42, 0.14, 0.42, 0.26},
    {0.07, 0.70, 0.45, 0.63, 1.00, 0.12, 0.61, 0.63, 0.68, 0.29, 0.73, 0.74, 0.21, 0.27, 0.43, 0.14},
    {0.76, 0.20, 0.07, 0.34, 1.00, 0.84, 0.51, 0.42, 0.22, 0.75, 0.49, 0.09, 0.76, 0.19, 0.50, 0.32},
    {0.07, 0.17, 0.10, 0.38, 1.00, 0.46, 0.17, 0.77, 0.52, 0.12, 0.21, 0.13, 0.63, 0.23, 0.76, 0.51},
    {0.07, 0.74, 0.45, 0.37, 1.00, 0.52, 0.09, 0.08, 0.71, 0.21, 0.15, 0.84, 0.42, 0.09, 0.13, 0.20},
    {0.21, 0.07, 0.43, 0.53, 1.00, 0.84, 0.64, 0.77, 0.78, 0.73, 0.27, 0.37, 0.67, 0.22, 0.23, 0.25},
    {0.79, 0.40, 0.81, 0.23, 1.00, 0.53, 0.26, 0.52, 0.08, 0.16, 0.78, 0.14, 0.74, 0.49, 0.79, 0.13},
};

//                                   duty  amplitude  tonic
constexpr double kShape[kMotionCount][3] = {
    {0.50, 12.0, 0.0},  // A1 lift heel
    {0.40, 8.0, 0.0},   // A2 lift toes
    {0.50, 10.0, 0.0},  // A3 foot inversion
    {0.60, 14.0, 0.0},  // A4 stretch leg forward
    {0.60, 11.0, 0.0},  // A5 stretch leg backward
    {0.70, 9.0, 3.0},   // A6 standing with foot inversion
    {0.45, 13.0, 0.0},  // A7 turn round
    {0.35, 16.0, 0.0},  // A8 step in situ
    {0.60, 15.0, 0.0},  // A9 walk forward
    {0.55, 12.0, 0.0},  // A10 walk backward
};

std::array<MotionProfile, kMotionCount> build_profiles() {
    std::array<MotionProfile, kMotionCount> out;
    for (std::size_t m = 0; m < kMotionCount; ++m) {
        auto& p = out[m];
        p.label = kMotions[m];
        std::copy(std::begin(kGain[m]), std::end(kGain[m]), p.spatial_gain.begin());
        p.duty = kShape[m][0];
        p.amplitude_kpa = kShape[m][1];
        p.tonic_kpa = kShape[m][2];
    }
    return out;
}

// Flat-topped burst on [start, start + length] with raised-cosine edges.
double tukey(double t, double start, double length, double edge) {
    const double u = t - start;
    if (u <= 0.0 || u >= length) return 0.0;
    if (u < edge) return 0.5 * (1.0 - std::cos(std::numbers::pi * u / edge));
    if (u > length - edge) return 0.5 * (1.0 - std::cos(std::numbers::pi * (length - u) / edge));
    return 1.0;
}

double hann(double t, double centre, double width) {
    const double u = t - centre;
    if (std::abs(u) >= 0.5 * width) return 0.0;
    return 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * u / width));
}

double ramp(double t, double start, double edge) {
    const double u = t - start;
    if (u <= 0.0) return 0.0;
    if (u >= edge) return 1.0;
    return 0.5 * (1.0 - std::cos(std::numbers::pi * u / edge));
}

// Turns per-channel pressure into voltages with noise and drift.
class Renderer {
public:
    Renderer(const SimConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

    std::size_t samples(double duration_s) const {
        return static_cast<std::size_t>(std::llround(duration_s * cfg_.sample_rate_hz));
    }
    double time(std::size_t i) const { return static_cast<double>(i) / cfg_.sample_rate_hz; }
    std::mt19937_64& rng() { return rng_; }

    template <class PressureAt>
    std::vector<SensorFrame> render(std::size_t n, PressureAt&& pressure_at) {
        std::normal_distribution<double> noise(0.0, 1.0);
        std::vector<SensorFrame> frames(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = time(i);
            auto& f = frames[i];
            f.seq = static_cast<std::uint32_t>(i);
            f.timestamp_us = std::llround(t * 1e6);
            for (std::size_t c = 0; c < kChannels; ++c) {
                const double rel = pressure_to_relative(std::max(0.0, pressure_at(t, c)), cfg_.pressure);
                double v = cfg_.v0 * (1.0 + rel) + cfg_.drift_per_s * t;
                if (cfg_.noise_sigma > 0.0) v += cfg_.v0 * cfg_.noise_sigma * noise(rng_);
                f.volts[c] = v;
            }
        }
        return frames;
    }

private:
    const SimConfig& cfg_;
    std::mt19937_64 rng_;
};

std::size_t motion_index(MotionLabel m) { return static_cast<std::size_t>(m); }

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::InvalidScenarioParams, what);
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void PressureModel::validate() const {
    if (!(knee_kpa > 0.0) || !(s_low > 0.0) || !(s_high >= 0.0) || !(s_high < s_low) ||
        !(saturation > 0.0)) {
        throw Error(Errc::InvalidArgument,
                    "pressure model needs knee > 0, 0 <= s_high < s_low, saturation > 0");
    }
}

double pressure_to_relative(double p_kpa, const PressureModel& m) {
    if (p_kpa < 0.0 || std::isnan(p_kpa)) {
        throw Error(Errc::NegativePressure, "pressure " + fmt(p_kpa) + " kPa is negative");
    }
    const double r = p_kpa <= m.knee_kpa ? m.s_low * p_kpa
                                         : m.s_low * m.knee_kpa + m.s_high * (p_kpa - m.knee_kpa);
    return std::min(r, m.saturation);
}

const MotionProfile& default_profile(MotionLabel motion) {
    static const auto profiles = build_profiles();
    if (motion == MotionLabel::Rest) {
        throw Error(Errc::UnknownMotion, "REST has no motion profile");
    }
    return profiles[motion_index(motion)];
}

void SimConfig::validate() const {
    const bool ok = subjects > 0 && sets_per_motion > 0 && trial_s > preamble_s && preamble_s > 0.0 &&
                    sample_rate_hz > 0.0 && noise_sigma >= 0.0 && subject_scale_sigma >= 0.0 &&
                    gain_jitter >= 0.0 && set_jitter >= 0.0 && burst_jitter >= 0.0 &&
                    timing_jitter_s >= 0.0 && v0 > 0.0 && std::isfinite(drift_per_s);
    if (!ok) throw Error(Errc::InvalidArgument, "simulator configuration out of range");
    pressure.validate();
}

std::string subject_name(int subject) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%02d", subject);
    return buf;
}

Synthesized synth_session(MotionLabel motion, int subject, int set_index, const SimConfig& cfg) {
    cfg.validate();
    const auto m = motion_index(motion);
    if (m > kMotionCount) throw Error(Errc::UnknownMotion, "motion index out of range");

    Synthesized out;
    out.session.subject_id = subject_name(subject);
    out.session.motion = motion;
    out.session.set_index = set_index;
    out.session.sample_rate_hz = cfg.sample_rate_hz;

    // Subject traits are shared by every recording of that subject.
    std::mt19937_64 subject_rng(derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(subject)}));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double subject_scale = std::exp(cfg.subject_scale_sigma * gauss(subject_rng));
    std::array<double, kChannels> subject_gain{};
    for (auto& g : subject_gain) g = std::max(0.0, 1.0 + cfg.gain_jitter * gauss(subject_rng));

    Renderer renderer(cfg, derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(subject), m,
                                                  static_cast<std::uint64_t>(set_index)}));
    const std::size_t n = renderer.samples(cfg.trial_s);

    if (motion == MotionLabel::Rest) {
        out.session.frames = renderer.render(n, [](double, std::size_t) { return 0.0; });
        return out;
    }

    const MotionProfile& profile = default_profile(motion);
    const double period = 1.0 / profile.rep_hz;
    const double length = profile.duty * period;
    const double set_scale = std::max(0.0, 1.0 + cfg.set_jitter * gauss(renderer.rng()));
    std::uniform_real_distribution<double> jitter(0.0, cfg.timing_jitter_s);

    out.truth.duty = profile.duty;
    out.truth.cycle_s = period;
    for (std::size_t k = 0; cfg.preamble_s + static_cast<double>(k + 1) * period <= cfg.trial_s + 1e-9; ++k) {
        Burst b;
        b.onset_s = cfg.preamble_s + static_cast<double>(k) * period +
                    std::min(jitter(renderer.rng()), period - length);
        b.duration_s = length;
        b.amplitude_kpa = profile.amplitude_kpa * subject_scale * set_scale *
                          std::max(0.0, 1.0 + cfg.burst_jitter * gauss(renderer.rng()));
        out.truth.bursts.push_back(b);
    }

    std::array<double, kChannels> gain{};
    for (std::size_t c = 0; c < kChannels; ++c) gain[c] = profile.spatial_gain[c] * subject_gain[c];
    const double tonic = profile.tonic_kpa * subject_scale * set_scale;
    const auto& bursts = out.truth.bursts;

    out.session.frames = renderer.render(n, [&](double t, std::size_t c) {
        double p = tonic * ramp(t, cfg.preamble_s, profile.edge_s);
        // Bursts are ordered and disjoint; find the one that may cover t.
        const double rel = (t - cfg.preamble_s) / period;
        if (rel >= 0.0) {
            const auto k = static_cast<std::size_t>(rel);
            if (k < bursts.size()) {
                p += bursts[k].amplitude_kpa *
                     tukey(t, bursts[k].onset_s, bursts[k].duration_s, profile.edge_s);
            }
        }
        return gain[c] * p;
    });
    return out;
}

std::string_view to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::Gait: return "gait";
        case Scenario::ChairStand: return "chairstand";
        case Scenario::Tandem: return "tandem";
    }
    return "?";
}

std::optional<Scenario> parse_scenario(std::string_view text) noexcept {
    for (auto s : {Scenario::Gait, Scenario::ChairStand, Scenario::Tandem}) {
        if (text == to_string(s)) return s;
    }
    return std::nullopt;
}

Synthesized synth_health(Scenario scenario, const HealthParams& params, const SimConfig& cfg) {
    cfg.validate();
    Synthesized out;
    out.session.subject_id = subject_name(1);
    out.session.set_index = 1;
    out.session.sample_rate_hz = cfg.sample_rate_hz;
    Renderer renderer(cfg, derive_seed(cfg.seed, {3, static_cast<std::uint64_t>(scenario)}));
    const double t0 = cfg.preamble_s;

    switch (scenario) {
        case Scenario::Gait: {
            const auto& g = params.gait;
            require(g.cycle_s > 0.0 && g.duty > 0.0 && g.duty < 1.0 && g.walk_s >= 2.0 * g.cycle_s &&
                        g.amplitude_kpa > 0.0 && g.edge_s >= 0.0 && g.lead_s >= g.edge_s,
                    "gait needs 0 < duty < 1, at least two cycles and lead_s >= edge_s");
            const double stance = g.duty * g.cycle_s;
            require(g.edge_s < std::min(stance, g.cycle_s - stance),
                    "gait edge is longer than a phase");
            const auto& profile = default_profile(g.profile);
            out.session.motion = g.profile;
            out.truth.duty = g.duty;
            out.truth.cycle_s = g.cycle_s;
            const double first = t0 + g.lead_s;
            for (std::size_t k = 0; static_cast<double>(k + 1) * g.cycle_s <= g.walk_s + 1e-9; ++k) {
                out.truth.bursts.push_back({first + static_cast<double>(k) * g.cycle_s, stance, g.amplitude_kpa});
            }
            const auto& bursts = out.truth.bursts;
            const std::size_t n = renderer.samples(first + g.walk_s + 1.0);
            out.session.frames = renderer.render(n, [&](double t, std::size_t c) {
                const double rel = (t - first) / g.cycle_s + 0.5;
                if (rel < 0.0) return 0.0;
                double p = 0.0;
                // Edges straddle the nominal transitions, so look at both neighbours.
                const auto k = static_cast<std::size_t>(rel);
                for (std::size_t j = k > 0 ? k - 1 : 0; j <= k && j < bursts.size(); ++j) {
                    p += tukey(t, bursts[j].onset_s - 0.5 * g.edge_s, stance + g.edge_s, g.edge_s);
                }
                return profile.spatial_gain[c] * g.amplitude_kpa * p;
            });
            break;
        }
        case Scenario::ChairStand: {
            const auto& cs = params.chair;
            require(cs.repetitions >= 1 && cs.test_s > 0.0 && cs.burst_s > 0.0 && cs.jitter_s >= 0.0 &&
                        cs.amplitude_kpa > 0.0 && cs.tail_s >= 0.0,
                    "chair stand needs repetitions >= 1 and positive durations");
            const double spacing = cs.test_s / cs.repetitions;
            require(spacing >= cs.burst_s + 2.0 * cs.jitter_s,
                    "chair stand bursts would overlap: " + std::to_string(cs.repetitions) + " in " +
                        fmt(cs.test_s) + " s");
            const auto& profile = default_profile(cs.profile);
            out.session.motion = cs.profile;
            out.truth.cycle_s = spacing;
            out.truth.duty = cs.burst_s / spacing;
            std::uniform_real_distribution<double> jitter(-cs.jitter_s, cs.jitter_s);
            std::vector<double> centres;
            for (int k = 0; k < cs.repetitions; ++k) {
                const double centre = t0 + spacing * (k + 0.5) + jitter(renderer.rng());
                centres.push_back(centre);
                out.truth.bursts.push_back({centre - 0.5 * cs.burst_s, cs.burst_s, cs.amplitude_kpa});
            }
            const std::size_t n = renderer.samples(t0 + cs.test_s + cs.tail_s);
            out.session.frames = renderer.render(n, [&](double t, std::size_t c) {
                const double rel = (t - t0) / spacing;
                if (rel < -1.0) return 0.0;
                const auto k = static_cast<long>(std::floor(rel));
                double p = 0.0;
                for (long j = std::max(0L, k - 1); j <= k + 1 && j < cs.repetitions; ++j) {
                    p += hann(t, centres[static_cast<std::size_t>(j)], cs.burst_s);
                }
                return profile.spatial_gain[c] * cs.amplitude_kpa * p;
            });
            break;
        }
        case Scenario::Tandem: {
            const auto& td = params.tandem;
            require(td.shake_s > t0, "tandem shake must start after the " + fmt(t0) + " s rest hold");
            require(td.shake_s < td.duration_s, "tandem shake starts after the recording ends");
            require(!td.loss_s || (*td.loss_s > td.shake_s && *td.loss_s < td.duration_s),
                    "tandem balance loss must fall between shake onset and the end");
            require(td.shake_hz > 0.0 && td.shake_kpa > 0.0 && td.loss_kpa > 0.0,
                    "tandem amplitudes and frequency must be positive");
            const auto& profile = default_profile(td.profile);
            out.session.motion = td.profile;
            out.truth.shake_s = td.shake_s;
            out.truth.loss_s = td.loss_s;
            const std::size_t n = renderer.samples(td.duration_s);
            out.session.frames = renderer.render(n, [&](double t, std::size_t c) {
                double p = 0.0;
                if (t > td.shake_s) {
                    p += td.shake_kpa * (1.0 - std::cos(2.0 * std::numbers::pi * td.shake_hz * (t - td.shake_s)));
                }
                if (td.loss_s) p += td.loss_kpa * ramp(t, *td.loss_s, 0.1);
                return profile.spatial_gain[c] * p;
            });
            break;
        }
    }
    return out;
}

StreamStats stream_session(const Session& session, const net::Endpoint& endpoint,
                           double rate_multiplier, const wire::AdcScale& scale,
                           std::chrono::milliseconds send_timeout) {
    if (!(rate_multiplier > 0.0) || !(session.sample_rate_hz > 0.0)) {
        throw Error(Errc::InvalidArgument, "rate multiplier and sample rate must be positive");
    }
    // Encode up front so pacing does not depend on encoding time.
    std::vector<wire::EncodedFrame> encoded;
    encoded.reserve(session.frames.size());
    for (const auto& f : session.frames) encoded.push_back(wire::encode_frame(wire::to_wire_frame(f, scale)));

    auto sock = net::Socket::connect_to(endpoint);
    sock.set_send_timeout(send_timeout);

    using clock = std::chrono::steady_clock;
    const std::chrono::duration<double> period(1.0 / (session.sample_rate_hz * rate_multiplier));
    StreamStats stats;
    const auto start = clock::now();
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        std::this_thread::sleep_until(start + std::chrono::duration_cast<clock::duration>(period * static_cast<double>(i)));
        sock.send_all(encoded[i]);
        ++stats.frames_sent;
        stats.bytes_sent += encoded[i].size();
    }
    stats.elapsed_s = std::chrono::duration<double>(clock::now() - start).count();
    return stats;
}

void write_ground_truth(const GroundTruth& truth, std::ostream& out) {
    out << "duty=" << fmt(truth.duty) << '\n'
        << "cycle_s=" << fmt(truth.cycle_s) << '\n'
        << "bursts=" << truth.bursts.size() << '\n'
        << "shake_s=" << (truth.shake_s ? fmt(*truth.shake_s) : "") << '\n'
        << "loss_s=" << (truth.loss_s ? fmt(*truth.loss_s) : "") << '\n';
    for (std::size_t k = 0; k < truth.bursts.size(); ++k) {
        const auto& b = truth.bursts[k];
        out << "burst." << k + 1 << '=' << fmt(b.onset_s) << ',' << fmt(b.duration_s) << ','
            << fmt(b.amplitude_kpa) << '\n';
    }
}

std::vector<DatasetEntry> export_dataset(const std::filesystem::path& dir, const SimConfig& cfg) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());

    struct Job {
        int subject;
        MotionLabel motion;
        int set;
    };
    std::vector<Job> jobs;
    for (int s = 1; s <= cfg.subjects; ++s) {
        for (auto m : kMotions) {
            for (int k = 1; k <= cfg.sets_per_motion; ++k) jobs.push_back({s, m, k});
        }
    }

    std::vector<DatasetEntry> entries(jobs.size());
    std::vector<GroundTruth> truths(jobs.size());
    std::vector<std::string> failures(jobs.size());
    const auto count = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto& job = jobs[idx];
        try {
            auto syn = synth_session(job.motion, job.subject, job.set, cfg);
            auto& e = entries[idx];
            e.subject = syn.session.subject_id;
            e.motion = job.motion;
            e.set_index = job.set;
            e.frames = syn.session.frames.size();
            e.sample_rate_hz = syn.session.sample_rate_hz;
            e.file = e.subject + "_" + std::string(to_string(job.motion)) + "_" + std::to_string(job.set) + ".csv";
            write_csv(syn.session, dir / e.file);
            truths[idx] = std::move(syn.truth);
        } catch (const std::exception& ex) {
            failures[idx] = ex.what();
        }
    }
    for (const auto& f : failures) {
        if (!f.empty()) throw Error(Errc::IoError, f);
    }

    std::ofstream manifest(dir / "manifest.csv");
    std::ofstream truth(dir / "ground_truth.csv");
    if (!manifest || !truth) throw Error(Errc::IoError, "cannot write manifest in " + dir.string());
    manifest << "file,subject,motion,set,frames,sample_rate_hz\n";
    truth << "file,burst,onset_s,duration_s,amplitude_kpa\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        manifest << e.file << ',' << e.subject << ',' << to_string(e.motion) << ',' << e.set_index << ','
                 << e.frames << ',' << fmt(e.sample_rate_hz) << '\n';
        for (std::size_t k = 0; k < truths[i].bursts.size(); ++k) {
            const auto& b = truths[i].bursts[k];
            truth << e.file << ',' << k + 1 << ',' << fmt(b.onset_s) << ',' << fmt(b.duration_s) << ','
                  << fmt(b.amplitude_kpa) << '\n';
        }
    }
    if (!manifest || !truth) throw Error(Errc::IoError, "write failed in " + dir.string());
    return entries;
}

}  // namespace calfsense::sim
