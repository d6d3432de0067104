#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "calfsense/core.hpp"

namespace calfsense {

// Detection knobs shared by the three health analyses.
struct EventParams {
    double smooth_s = 0.25;         // moving-average width of the envelope
    double theta_factor = 3.0;      // high threshold, in rest sigmas above rest mean
    double release_factor = 1.5;    // low threshold
    double min_event_gap_s = 0.4;   // minimum onset-to-onset spacing of activations
    double min_prominence = 0.05;   // chair stand peaks, relative units
    double min_peak_gap_s = 1.0;
    double loss_factor = 10.0;      // tandem balance loss, in rest sigmas
    double rolling_s = 0.5;         // tandem rolling sigma window
    double sustain_s = 0.5;         // tandem shake must persist this long
    bool invert = false;            // stance = low activation

    // Throws InvalidArgument.
    void validate() const;
};

// Seconds from the first sample; [start_s, end_s).
struct RestSegment {
    double start_s = 0.0;
    double end_s = kDefaultBaselineWindowS;
};

// Per-sample mean |x| over channels. Throws EmptySeries.
std::vector<double> channel_activation(const NormalizedSeries& series);

// Centred moving average; the window shrinks at the ends.
std::vector<double> moving_average(std::span<const double> x, std::size_t width);

// channel_activation smoothed over smooth_s. Throws EmptySeries.
std::vector<double> activation_envelope(const NormalizedSeries& series, const EventParams& params);

struct RestStats {
    double mean = 0.0;
    double sigma = 0.0;
};

// Mean and population sigma of the unsmoothed activation over the rest
// segment. Throws NoRestSegment when it holds fewer than two samples.
RestStats rest_statistics(std::span<const double> activation, double sample_rate_hz,
                          const RestSegment& rest);

struct GaitCycle {
    double start_s = 0.0;
    double stance_s = 0.0;
    double swing_s = 0.0;
};

struct GaitReport {
    std::vector<GaitCycle> cycles;
    double stance_pct = 0.0;
    double swing_pct = 0.0;
    double cadence_spm = 0.0;  // gait cycles per minute of the instrumented leg
    double cycle_s = 0.0;
    double threshold_high = 0.0;
    double threshold_low = 0.0;
    RestStats rest;
};

// Hysteresis on the envelope finds activations (stance). Each activation's
// edges are then placed where the envelope crosses half-way between the rest
// level and the activation peak, which cancels the widening introduced by
// smoothing. A cycle is one stance plus the following swing.
// Errors: NoRestSegment, NoCyclesDetected.
GaitReport gait_analyze(const NormalizedSeries& series, const EventParams& params,
                        const RestSegment& rest = {});

struct ChairStandReport {
    std::size_t count = 0;
    double window_s = 30.0;
    double start_s = 0.0;
    std::vector<double> stand_times_s;
    std::vector<double> prominences;
};

// Envelope peaks in [start_s, start_s + window_s): keep the tallest peaks at
// least min_peak_gap_s apart, then drop those under min_prominence.
// Throws SeriesTooShort.
ChairStandReport chair_stand_count(const NormalizedSeries& series, const EventParams& params,
                                   double window_s = 30.0, double start_s = 0.0);

struct TandemReport {
    std::optional<double> shake_onset_s;
    std::optional<double> balance_loss_s;
    double rest_sigma = 0.0;
    double shake_threshold = 0.0;
    double loss_threshold = 0.0;
};

// Rolling sigma of the envelope (centred window rolling_s). Shake onset is
// the first sample where it stays above theta_factor * rest_sigma for
// sustain_s; balance loss the first sample above loss_factor * rest_sigma.
// Shake is only searched up to the loss. Throws NoRestSegment.
TandemReport tandem_analyze(const NormalizedSeries& series, const EventParams& params,
                            const RestSegment& rest = {});

std::vector<double> rolling_sigma(std::span<const double> x, std::size_t window);

// Peak indices of x within [begin, end), scipy-style plateau handling.
std::vector<std::size_t> local_maxima(std::span<const double> x, std::size_t begin, std::size_t end);
double peak_prominence(std::span<const double> x, std::size_t peak, std::size_t begin,
                       std::size_t end);

void write_params(const EventParams& params, std::ostream& out);
void write_report(const GaitReport& report, const EventParams& params, std::ostream& out);
void write_report(const ChairStandReport& report, const EventParams& params, std::ostream& out);
void write_report(const TandemReport& report, const EventParams& params, std::ostream& out);
void write_events_csv(const GaitReport& report, std::ostream& out);
void write_events_csv(const ChairStandReport& report, std::ostream& out);
void write_events_csv(const TandemReport& report, std::ostream& out);

// t_s,envelope,threshold_high,threshold_low,event
void write_plot_csv(const NormalizedSeries& series, std::span<const double> envelope, double high,
                    double low, std::span<const double> event_times, std::ostream& out);

}  // namespace calfsense
