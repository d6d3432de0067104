#include "calfsense/health.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "calfsense/error.hpp"

namespace calfsense {

namespace {

std::size_t samples_for(double seconds, double rate) {
    return static_cast<std::size_t>(std::max(0LL, std::llround(seconds * rate)));
}

struct Activation {
    std::size_t on = 0;
    std::size_t off = 0;  // exclusive; equals series length when still active
    bool closed = false;
    bool open_at_start = false;
};

// Activations whose onset follows the previous onset by less than `debounce`
// samples are folded into it.
std::vector<Activation> hysteresis(std::span<const double> env, double high, double low,
                                   std::size_t debounce) {
    std::vector<Activation> out;
    bool active = false;
    for (std::size_t i = 0; i < env.size(); ++i) {
        if (!active && env[i] > high) {
            active = true;
            if (!out.empty() && i - out.back().on < debounce) {
                out.back().closed = false;
            } else {
                out.push_back(Activation{i, env.size(), false, i == 0});
            }
        } else if (active && env[i] <= low) {
            active = false;
            out.back().off = i;
            out.back().closed = true;
        }
    }
    if (active) out.back().off = env.size();
    return out;
}

// Fractional sample index where the activation crosses `level` rising / falling.
std::pair<double, double> refine_edges(std::span<const double> env, const Activation& a,
                                       double level) {
    std::size_t first = a.off;
    std::size_t last = a.on;
    for (std::size_t i = a.on; i < a.off; ++i) {
        if (env[i] >= level) {
            if (first == a.off) first = i;
            last = i;
        }
    }
    if (first == a.off) return {static_cast<double>(a.on), static_cast<double>(a.off)};

    double rise = static_cast<double>(first);
    if (first > 0 && env[first] > env[first - 1]) {
        rise = static_cast<double>(first - 1) +
               (level - env[first - 1]) / (env[first] - env[first - 1]);
    }
    double fall = static_cast<double>(last);
    if (last + 1 < env.size() && env[last] > env[last + 1]) {
        fall = static_cast<double>(last) + (env[last] - level) / (env[last] - env[last + 1]);
    }
    return {rise, fall};
}

void require_rest(const NormalizedSeries& series) {
    if (series.size() == 0) throw Error(Errc::EmptySeries, "series has no samples");
}

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

void EventParams::validate() const {
    const double values[] = {smooth_s,       theta_factor, release_factor, min_event_gap_s,
                             min_prominence, min_peak_gap_s, loss_factor,  rolling_s,
                             sustain_s};
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw Error(Errc::InvalidArgument, "event parameters must be positive and finite");
        }
    }
    if (!(theta_factor > release_factor)) {
        throw Error(Errc::InvalidArgument, "theta_factor must exceed release_factor");
    }
}

std::vector<double> channel_activation(const NormalizedSeries& series) {
    const std::size_t n = series.size();
    if (n == 0) throw Error(Errc::EmptySeries, "series has no samples");
    std::vector<double> raw(n);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (double v : series.x.row(t)) acc += std::abs(v);
        raw[t] = acc / static_cast<double>(kChannels);
    }
    return raw;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t width) {
    const std::size_t n = x.size();
    width = std::max<std::size_t>(1, width);
    const std::size_t left = (width - 1) / 2;
    const std::size_t right = width - 1 - left;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + x[t];

    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t lo = t >= left ? t - left : 0;
        const std::size_t hi = std::min(n, t + right + 1);
        out[t] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

std::vector<double> activation_envelope(const NormalizedSeries& series, const EventParams& params) {
    const auto raw = channel_activation(series);
    return moving_average(raw, samples_for(params.smooth_s, series.sample_rate_hz));
}

RestStats rest_statistics(std::span<const double> activation, double sample_rate_hz,
                          const RestSegment& rest) {
    if (!(rest.end_s > rest.start_s) || rest.start_s < 0.0) {
        throw Error(Errc::NoRestSegment, "rest segment must satisfy 0 <= start < end");
    }
    const std::size_t lo = std::min(activation.size(), samples_for(rest.start_s, sample_rate_hz));
    const std::size_t hi = std::min(activation.size(), samples_for(rest.end_s, sample_rate_hz));
    if (hi < lo + 2) {
        throw Error(Errc::NoRestSegment, "rest segment covers fewer than two samples");
    }
    RestStats stats;
    const auto seg = activation.subspan(lo, hi - lo);
    stats.mean = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(seg.size());
    double ss = 0.0;
    for (double v : seg) ss += (v - stats.mean) * (v - stats.mean);
    stats.sigma = std::sqrt(ss / static_cast<double>(seg.size()));
    return stats;
}

GaitReport gait_analyze(const NormalizedSeries& series, const EventParams& params,
                        const RestSegment& rest) {
    params.validate();
    require_rest(series);
    const double fs = series.sample_rate_hz;
    const auto raw = channel_activation(series);
    const auto env = moving_average(raw, samples_for(params.smooth_s, fs));

    GaitReport report;
    report.rest = rest_statistics(raw, fs, rest);
    report.threshold_high = report.rest.mean + params.theta_factor * report.rest.sigma;
    report.threshold_low = report.rest.mean + params.release_factor * report.rest.sigma;

    const auto acts = hysteresis(env, report.threshold_high, report.threshold_low,
                                 samples_for(params.min_event_gap_s, fs));

    struct Edges {
        double rise;
        double fall;
    };
    std::vector<Edges> edges;
    for (const auto& a : acts) {
        if (!a.closed || a.open_at_start) {
            edges.push_back({-1.0, -1.0});  // placeholder: not usable as a cycle boundary
            continue;
        }
        double peak = report.rest.mean;
        for (std::size_t i = a.on; i < a.off; ++i) peak = std::max(peak, env[i]);
        const double level = std::max(report.threshold_high,
                                      report.rest.mean + 0.5 * (peak - report.rest.mean));
        const auto [rise, fall] = refine_edges(env, a, level);
        edges.push_back({rise / fs, fall / fs});
    }

    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const auto& a = edges[k];
        const auto& b = edges[k + 1];
        if (a.rise < 0.0 || b.rise < 0.0) continue;
        GaitCycle cycle;
        if (!params.invert) {
            cycle.start_s = a.rise;
            cycle.stance_s = a.fall - a.rise;
            cycle.swing_s = b.rise - a.fall;
        } else {
            cycle.start_s = a.fall;
            cycle.stance_s = b.rise - a.fall;
            cycle.swing_s = b.fall - b.rise;
        }
        if (cycle.stance_s > 0.0 && cycle.swing_s > 0.0) report.cycles.push_back(cycle);
    }
    if (report.cycles.empty()) {
        throw Error(Errc::NoCyclesDetected, "no complete stance/swing cycle found (" +
                                                std::to_string(acts.size()) + " activations)");
    }

    double pct = 0.0;
    double total = 0.0;
    for (const auto& c : report.cycles) {
        pct += 100.0 * c.stance_s / (c.stance_s + c.swing_s);
        total += c.stance_s + c.swing_s;
    }
    const auto n = static_cast<double>(report.cycles.size());
    report.stance_pct = pct / n;
    report.swing_pct = 100.0 - report.stance_pct;
    report.cycle_s = total / n;
    report.cadence_spm = 60.0 / report.cycle_s;
    return report;
}

std::vector<std::size_t> local_maxima(std::span<const double> x, std::size_t begin, std::size_t end) {
    std::vector<std::size_t> peaks;
    end = std::min(end, x.size());
    if (end < begin + 3) return peaks;
    std::size_t i = begin + 1;
    while (i + 1 < end) {
        if (x[i - 1] < x[i]) {
            std::size_t ahead = i + 1;
            while (ahead + 1 < end && x[ahead] == x[i]) ++ahead;
            if (x[ahead] < x[i]) {
                peaks.push_back((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
        }
        ++i;
    }
    return peaks;
}

double peak_prominence(std::span<const double> x, std::size_t peak, std::size_t begin,
                       std::size_t end) {
    const double h = x[peak];
    double left_min = h;
    for (std::size_t i = peak; i-- > begin;) {
        if (x[i] > h) break;
        left_min = std::min(left_min, x[i]);
    }
    double right_min = h;
    for (std::size_t i = peak + 1; i < end; ++i) {
        if (x[i] > h) break;
        right_min = std::min(right_min, x[i]);
    }
    return h - std::max(left_min, right_min);
}

ChairStandReport chair_stand_count(const NormalizedSeries& series, const EventParams& params,
                                   double window_s, double start_s) {
    params.validate();
    if (!(window_s > 0.0) || start_s < 0.0) {
        throw Error(Errc::InvalidArgument, "chair stand window must be positive");
    }
    const double fs = series.sample_rate_hz;
    const std::size_t n = series.size();
    const std::size_t begin = samples_for(start_s, fs);
    const std::size_t length = samples_for(window_s, fs);
    if (n == 0 || n < begin + length) {
        throw Error(Errc::SeriesTooShort,
                    "series spans " + fmt(static_cast<double>(n) / fs, "%.3f") + " s, need " +
                        fmt(start_s + window_s, "%.3f") + " s");
    }
    const std::size_t end = begin + length;
    const auto env = activation_envelope(series, params);

    auto peaks = local_maxima(env, begin, end);

    // Tallest first; a kept peak suppresses neighbours closer than the gap.
    const std::size_t distance = std::max<std::size_t>(1, samples_for(params.min_peak_gap_s, fs));
    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return env[peaks[a]] > env[peaks[b]]; });
    std::vector<bool> keep(peaks.size(), true);
    for (std::size_t idx : order) {
        if (!keep[idx]) continue;
        for (std::size_t j = idx; j-- > 0 && peaks[idx] - peaks[j] < distance;) keep[j] = false;
        for (std::size_t j = idx + 1; j < peaks.size() && peaks[j] - peaks[idx] < distance; ++j) {
            keep[j] = false;
        }
    }

    ChairStandReport report;
    report.window_s = window_s;
    report.start_s = start_s;
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        if (!keep[k]) continue;
        const double prom = peak_prominence(env, peaks[k], begin, end);
        if (prom < params.min_prominence) continue;
        report.stand_times_s.push_back(static_cast<double>(peaks[k]) / fs);
        report.prominences.push_back(prom);
    }
    report.count = report.stand_times_s.size();
    return report;
}

std::vector<double> rolling_sigma(std::span<const double> x, std::size_t window) {
    const std::size_t n = x.size();
    window = std::max<std::size_t>(2, window);
    const std::size_t left = window / 2;
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= left ? i - left : 0;
        const std::size_t hi = std::min(n, lo + window);
        const std::size_t count = hi - lo;
        if (count < 2) continue;
        double mean = 0.0;
        for (std::size_t k = lo; k < hi; ++k) mean += x[k];
        mean /= static_cast<double>(count);
        double ss = 0.0;
        for (std::size_t k = lo; k < hi; ++k) ss += (x[k] - mean) * (x[k] - mean);
        out[i] = std::sqrt(ss / static_cast<double>(count));
    }
    return out;
}

TandemReport tandem_analyze(const NormalizedSeries& series, const EventParams& params,
                            const RestSegment& rest) {
    params.validate();
    require_rest(series);
    const double fs = series.sample_rate_hz;
    const auto raw = channel_activation(series);
    const auto env = moving_average(raw, samples_for(params.smooth_s, fs));

    TandemReport report;
    report.rest_sigma = rest_statistics(raw, fs, rest).sigma;
    report.shake_threshold = params.theta_factor * report.rest_sigma;
    report.loss_threshold = params.loss_factor * report.rest_sigma;

    const auto sigma = rolling_sigma(env, samples_for(params.rolling_s, fs));
    std::size_t limit = sigma.size();
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (sigma[i] > report.loss_threshold) {
            report.balance_loss_s = static_cast<double>(i) / fs;
            limit = i + 1;
            break;
        }
    }

    const std::size_t sustain = std::max<std::size_t>(1, samples_for(params.sustain_s, fs));
    std::size_t run = 0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (sigma[i] > report.shake_threshold) {
            ++run;
        } else {
            run = 0;
        }
        const std::size_t onset = i + 1 - run;
        if (onset >= limit) break;
        if (run >= sustain) {
            report.shake_onset_s = static_cast<double>(onset) / fs;
            break;
        }
    }
    return report;
}

void write_params(const EventParams& p, std::ostream& out) {
    out << "params.smooth_s=" << fmt(p.smooth_s) << '\n'
        << "params.theta_factor=" << fmt(p.theta_factor) << '\n'
        << "params.release_factor=" << fmt(p.release_factor) << '\n'
        << "params.min_event_gap_s=" << fmt(p.min_event_gap_s) << '\n'
        << "params.min_prominence=" << fmt(p.min_prominence) << '\n'
        << "params.min_peak_gap_s=" << fmt(p.min_peak_gap_s) << '\n'
        << "params.loss_factor=" << fmt(p.loss_factor) << '\n'
        << "params.rolling_s=" << fmt(p.rolling_s) << '\n'
        << "params.sustain_s=" << fmt(p.sustain_s) << '\n'
        << "params.invert=" << (p.invert ? "true" : "false") << '\n';
}

void write_report(const GaitReport& r, const EventParams& params, std::ostream& out) {
    out << "analysis=gait\n"
        << "cycles=" << r.cycles.size() << '\n'
        << "stance_pct=" << fmt(r.stance_pct, "%.4f") << '\n'
        << "swing_pct=" << fmt(r.swing_pct, "%.4f") << '\n'
        << "cycle_s=" << fmt(r.cycle_s) << '\n'
        << "cadence_spm=" << fmt(r.cadence_spm, "%.4f") << '\n'
        << "cadence_convention=gait cycles per minute, one instrumented leg\n"
        << "rest_mean=" << fmt(r.rest.mean, "%.8f") << '\n'
        << "rest_sigma=" << fmt(r.rest.sigma, "%.8f") << '\n'
        << "threshold_high=" << fmt(r.threshold_high, "%.8f") << '\n'
        << "threshold_low=" << fmt(r.threshold_low, "%.8f") << '\n';
    write_params(params, out);
}

void write_report(const ChairStandReport& r, const EventParams& params, std::ostream& out) {
    out << "analysis=chairstand\n"
        << "count=" << r.count << '\n'
        << "window_s=" << fmt(r.window_s, "%.3f") << '\n'
        << "start_s=" << fmt(r.start_s, "%.3f") << '\n';
    write_params(params, out);
}

void write_report(const TandemReport& r, const EventParams& params, std::ostream& out) {
    out << "analysis=tandem\n"
        << "shake_onset_s=" << (r.shake_onset_s ? fmt(*r.shake_onset_s, "%.4f") : "") << '\n'
        << "balance_loss_s=" << (r.balance_loss_s ? fmt(*r.balance_loss_s, "%.4f") : "") << '\n'
        << "rest_sigma=" << fmt(r.rest_sigma, "%.8f") << '\n'
        << "shake_threshold=" << fmt(r.shake_threshold, "%.8f") << '\n'
        << "loss_threshold=" << fmt(r.loss_threshold, "%.8f") << '\n';
    write_params(params, out);
}

void write_events_csv(const GaitReport& r, std::ostream& out) {
    out << "cycle,start_s,stance_s,swing_s,stance_pct\n";
    for (std::size_t i = 0; i < r.cycles.size(); ++i) {
        const auto& c = r.cycles[i];
        out << i + 1 << ',' << fmt(c.start_s) << ',' << fmt(c.stance_s) << ',' << fmt(c.swing_s)
            << ',' << fmt(100.0 * c.stance_s / (c.stance_s + c.swing_s), "%.4f") << '\n';
    }
}

void write_events_csv(const ChairStandReport& r, std::ostream& out) {
    out << "stand,t_s,prominence\n";
    for (std::size_t i = 0; i < r.count; ++i) {
        out << i + 1 << ',' << fmt(r.stand_times_s[i]) << ',' << fmt(r.prominences[i]) << '\n';
    }
}

void write_events_csv(const TandemReport& r, std::ostream& out) {
    out << "event,t_s\n";
    if (r.shake_onset_s) out << "shake_onset," << fmt(*r.shake_onset_s) << '\n';
    if (r.balance_loss_s) out << "balance_loss," << fmt(*r.balance_loss_s) << '\n';
}

void write_plot_csv(const NormalizedSeries& series, std::span<const double> envelope, double high,
                    double low, std::span<const double> event_times, std::ostream& out) {
    const double fs = series.sample_rate_hz;
    std::vector<int> marks(envelope.size(), 0);
    for (double t : event_times) {
        const auto idx = static_cast<std::size_t>(std::max(0LL, std::llround(t * fs)));
        if (idx < marks.size()) marks[idx] = 1;
    }
    out << "t_s,envelope,threshold_high,threshold_low,event\n";
    for (std::size_t i = 0; i < envelope.size(); ++i) {
        out << fmt(static_cast<double>(i) / fs) << ',' << fmt(envelope[i], "%.8f") << ','
            << fmt(high, "%.8f") << ',' << fmt(low, "%.8f") << ',' << marks[i] << '\n';
    }
}

}  // namespace calfsense
