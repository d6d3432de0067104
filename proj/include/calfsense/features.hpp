#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "calfsense/core.hpp"
#include "calfsense/matrix.hpp"
#include "calfsense/windowing.hpp"

namespace calfsense {

enum class Feature : std::size_t { Mean = 0, Rms = 1, Std = 2, Energy = 3 };

inline constexpr std::size_t kFeaturesPerChannel = 4;
inline constexpr std::size_t kFeatureDim = kChannels * kFeaturesPerChannel;

constexpr std::size_t feature_index(std::size_t channel, Feature f) noexcept {
    return channel * kFeaturesPerChannel + static_cast<std::size_t>(f);
}

// Column name such as "ch05_rms".
std::string feature_name(std::size_t index);

struct FeatureVector {
    std::array<double, kFeatureDim> values{};
    MotionLabel label = MotionLabel::Rest;
    Provenance provenance;
    std::size_t window_start = 0;
};

// Population statistics over one window; all throw Error(EmptyWindow) on n = 0.
double feat_mean(std::span<const double> x);
double feat_rms(std::span<const double> x);
double feat_std(std::span<const double> x);
double feat_energy(std::span<const double> x);

FeatureVector featurize(const Window& window);

// Parallel over windows. Output order matches input order.
std::vector<FeatureVector> featurize_all(std::span<const Window> windows);

namespace reference {
// Single-threaded twin of featurize_all, kept for tests and benchmarks.
std::vector<FeatureVector> featurize_all_serial(std::span<const Window> windows);
}  // namespace reference

Matrix to_matrix(std::span<const FeatureVector> features);

// Header: label,subject,set,ch01_mean,ch01_rms,...,ch16_energy
void write_feature_csv(std::span<const FeatureVector> features, std::ostream& out);
void write_feature_csv(std::span<const FeatureVector> features, const std::filesystem::path& path);

}  // namespace calfsense
