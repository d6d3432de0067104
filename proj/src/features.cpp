#include "calfsense/features.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "calfsense/error.hpp"

namespace calfsense {

namespace {

constexpr std::array<const char*, kFeaturesPerChannel> kFeatureSuffix = {"mean", "rms", "std",
                                                                        "energy"};

void require_samples(std::span<const double> x) {
    if (x.empty()) throw Error(Errc::EmptyWindow, "feature window has no samples");
}

// Fills the four slots of one channel. Column is gathered so the per-feature
// functions stay the single definition of each statistic.
void channel_features(const Window& window, std::size_t channel, std::vector<double>& column,
                      FeatureVector& out) {
    column.resize(window.rows);
    for (std::size_t r = 0; r < window.rows; ++r) column[r] = window.at(r, channel);
    const double energy = feat_energy(column);
    out.values[feature_index(channel, Feature::Mean)] = feat_mean(column);
    out.values[feature_index(channel, Feature::Rms)] = std::sqrt(energy);
    out.values[feature_index(channel, Feature::Std)] = feat_std(column);
    out.values[feature_index(channel, Feature::Energy)] = energy;
}

FeatureVector featurize_with(const Window& window, std::vector<double>& column) {
    if (window.rows == 0) throw Error(Errc::EmptyWindow, "window has no rows");
    FeatureVector fv;
    fv.label = window.label;
    fv.provenance = window.provenance;
    fv.window_start = window.start_index;
    for (std::size_t c = 0; c < kChannels; ++c) channel_features(window, c, column, fv);
    return fv;
}

}  // namespace

std::string feature_name(std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "ch%02zu_%s", index / kFeaturesPerChannel + 1,
                  kFeatureSuffix[index % kFeaturesPerChannel]);
    return buf;
}

double feat_mean(std::span<const double> x) {
    require_samples(x);
    double sum = 0.0;
    for (double v : x) sum += v;
    return sum / static_cast<double>(x.size());
}

double feat_rms(std::span<const double> x) { return std::sqrt(feat_energy(x)); }

double feat_std(std::span<const double> x) {
    const double mean = feat_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

double feat_energy(std::span<const double> x) {
    require_samples(x);
    double sum = 0.0;
    for (double v : x) sum += std::abs(v * v);
    return sum / static_cast<double>(x.size());
}

FeatureVector featurize(const Window& window) {
    std::vector<double> column;
    return featurize_with(window, column);
}

std::vector<FeatureVector> featurize_all(std::span<const Window> windows) {
    std::vector<FeatureVector> out(windows.size());
    const auto n = static_cast<std::ptrdiff_t>(windows.size());
    bool failed = false;
#pragma omp parallel
    {
        std::vector<double> column;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto& w = windows[static_cast<std::size_t>(i)];
            if (w.rows == 0) {
#pragma omp atomic write
                failed = true;
                continue;
            }
            out[static_cast<std::size_t>(i)] = featurize_with(w, column);
        }
    }
    if (failed) throw Error(Errc::EmptyWindow, "window has no rows");
    return out;
}

namespace reference {

std::vector<FeatureVector> featurize_all_serial(std::span<const Window> windows) {
    std::vector<FeatureVector> out;
    out.reserve(windows.size());
    std::vector<double> column;
    for (const auto& w : windows) out.push_back(featurize_with(w, column));
    return out;
}

}  // namespace reference

Matrix to_matrix(std::span<const FeatureVector> features) {
    Matrix m(features.size(), kFeatureDim);
    for (std::size_t i = 0; i < features.size(); ++i) {
        std::copy(features[i].values.begin(), features[i].values.end(), m.row(i).begin());
    }
    return m;
}

void write_feature_csv(std::span<const FeatureVector> features, std::ostream& out) {
    out << "label,subject,set";
    for (std::size_t k = 0; k < kFeatureDim; ++k) out << ',' << feature_name(k);
    out << '\n';
    char buf[40];
    for (const auto& fv : features) {
        out << to_string(fv.label) << ',' << fv.provenance.subject << ',' << fv.provenance.set_index;
        for (double v : fv.values) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out << buf;
        }
        out << '\n';
    }
}

void write_feature_csv(std::span<const FeatureVector> features, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot open " + path.string());
    write_feature_csv(features, out);
}

}  // namespace calfsense
