#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "calfsense/core.hpp"

namespace calfsense {

enum class WindowMode { Fixed, Sliding };

struct WindowSpec {
    double length_s = 2.0;
    double overlap_frac = 0.5;
    WindowMode mode = WindowMode::Sliding;

    // Fixed mode forces zero overlap.
    static WindowSpec fixed(double length_s) { return {length_s, 0.0, WindowMode::Fixed}; }
    static WindowSpec sliding(double length_s, double overlap) {
        return {length_s, overlap, WindowMode::Sliding};
    }

    double effective_overlap() const noexcept {
        return mode == WindowMode::Fixed ? 0.0 : overlap_frac;
    }
    // Throws Error(InvalidArgument).
    void validate() const;
};

// A view of `rows` consecutive samples of a NormalizedSeries. It does not own
// its data and must not outlive the series it was cut from.
struct Window {
    std::span<const double> samples;  // row-major rows x kChannels
    std::size_t rows = 0;
    std::size_t start_index = 0;
    MotionLabel label = MotionLabel::Rest;
    Provenance provenance;

    double at(std::size_t row, std::size_t channel) const noexcept {
        return samples[row * kChannels + channel];
    }
};

std::size_t window_samples(const WindowSpec& spec, double sample_rate_hz);
std::size_t window_stride(const WindowSpec& spec, double sample_rate_hz);

// floor((L - w) / s) + 1, or 0 when L < w.
std::size_t window_count(std::size_t series_length, std::size_t window, std::size_t stride) noexcept;

// Throws SeriesTooShort when the series holds fewer samples than one window.
std::vector<Window> segment(const NormalizedSeries& series, const WindowSpec& spec);

// Same as segment() but starting at sample `first` (e.g. past the baseline rest).
std::vector<Window> segment_from(const NormalizedSeries& series, const WindowSpec& spec,
                                 std::size_t first);

}  // namespace calfsense
