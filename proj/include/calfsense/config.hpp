#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "calfsense/health.hpp"
#include "calfsense/pipeline.hpp"
#include "calfsense/simulator.hpp"
#include "calfsense/wire.hpp"

namespace calfsense {

// Everything a command needs, resolved from defaults, then a config file,
// then command-line flags. Keys are flat, e.g. "window.length_s".
struct RunConfig {
    std::uint64_t seed = 0;
    sim::SimConfig sim;
    sim::HealthParams health;
    PipelineConfig pipeline;
    EventParams events;
    RestSegment rest;
    double chair_window_s = 30.0;
    double chair_start_s = kDefaultBaselineWindowS;
    double adc_vref = 3.3;
    int adc_bits = 12;
    double rate_multiplier = 1.0;

    // Throws InvalidArgument for unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    static std::vector<std::string> keys();

    // key=value lines; '#' starts a comment. Errors name the line.
    void load(std::istream& in, const std::string& origin = "config");
    void load(const std::filesystem::path& path);

    // Derives per-stage seeds from the root seed and validates every block.
    void resolve();

    wire::AdcScale adc() const { return wire::AdcScale::from_bits(adc_vref, adc_bits); }

    // Every key in keys() order; reading it back reproduces this config.
    void write(std::ostream& out) const;
    void write(const std::filesystem::path& path) const;
};

}  // namespace calfsense
