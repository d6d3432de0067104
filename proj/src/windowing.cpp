#include "calfsense/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "calfsense/error.hpp"

namespace calfsense {

void WindowSpec::validate() const {
    if (!(length_s > 0.0) || !std::isfinite(length_s)) {
        throw Error(Errc::InvalidArgument, "window length must be positive");
    }
    if (!(overlap_frac >= 0.0 && overlap_frac < 1.0)) {
        throw Error(Errc::InvalidArgument, "window overlap must be in [0, 1)");
    }
    if (mode == WindowMode::Fixed && overlap_frac != 0.0) {
        throw Error(Errc::InvalidArgument, "fixed windows cannot overlap");
    }
}

std::size_t window_samples(const WindowSpec& spec, double sample_rate_hz) {
    spec.validate();
    const auto w = static_cast<std::size_t>(std::llround(spec.length_s * sample_rate_hz));
    if (w < 2) {
        throw Error(Errc::InvalidArgument, "window shorter than 2 samples at " +
                                               std::to_string(sample_rate_hz) + " Hz");
    }
    return w;
}

std::size_t window_stride(const WindowSpec& spec, double sample_rate_hz) {
    const std::size_t w = window_samples(spec, sample_rate_hz);
    const auto s = std::llround(static_cast<double>(w) * (1.0 - spec.effective_overlap()));
    return static_cast<std::size_t>(std::max<long long>(1, s));
}

std::size_t window_count(std::size_t series_length, std::size_t window,
                         std::size_t stride) noexcept {
    if (window == 0 || stride == 0 || series_length < window) return 0;
    return (series_length - window) / stride + 1;
}

std::vector<Window> segment_from(const NormalizedSeries& series, const WindowSpec& spec,
                                 std::size_t first) {
    const std::size_t w = window_samples(spec, series.sample_rate_hz);
    const std::size_t s = window_stride(spec, series.sample_rate_hz);
    const std::size_t length = series.size() > first ? series.size() - first : 0;
    if (length < w) {
        throw Error(Errc::SeriesTooShort, "series has " + std::to_string(length) +
                                              " samples, window needs " + std::to_string(w));
    }
    const std::size_t count = window_count(length, w, s);
    const auto data = series.x.data();

    std::vector<Window> windows;
    windows.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t start = first + k * s;
        Window win;
        win.samples = data.subspan(start * kChannels, w * kChannels);
        win.rows = w;
        win.start_index = start;
        win.label = series.source.motion;
        win.provenance = series.source;
        windows.push_back(std::move(win));
    }
    return windows;
}

std::vector<Window> segment(const NormalizedSeries& series, const WindowSpec& spec) {
    return segment_from(series, spec, 0);
}

}  // namespace calfsense
