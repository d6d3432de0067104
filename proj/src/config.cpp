#include "calfsense/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include "calfsense/error.hpp"
#include "calfsense/seed.hpp"
#include "calfsense/textio.hpp"

namespace calfsense {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw Error(Errc::InvalidArgument, key + ": '" + value + "' is not " + expected);
}

double parse_real(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
        bad_value(key, value, "a finite number");
    }
    return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (value.empty() || *end != '\0' || errno == ERANGE) bad_value(key, value, "an integer");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    if (value.empty() || value[0] == '-') bad_value(key, value, "an unsigned integer");
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (*end != '\0' || errno == ERANGE) bad_value(key, value, "an unsigned integer");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    bad_value(key, value, "a boolean");
}

struct Field {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Ref>
Field real(std::string key, Ref ref) {
    return {key,
            [key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_real(key, v); },
            [ref](const RunConfig& c) { return textio::fmt17(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Field integer(std::string key, Ref ref) {
    return {key,
            [key, ref](RunConfig& c, const std::string& v) {
                using T = std::remove_reference_t<decltype(ref(c))>;
                const auto parsed = parse_integer(key, v);
                if (parsed < 0 && std::is_unsigned_v<T>) bad_value(key, v, "a non-negative integer");
                ref(c) = static_cast<T>(parsed);
            },
            [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Field boolean(std::string key, Ref ref) {
    return {key,
            [key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_bool(key, v); },
            [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back({"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }});

        f.push_back(real("baseline.window_s", [](RunConfig& c) -> double& { return c.pipeline.baseline_window_s; }));
        f.push_back(boolean("baseline.skip", [](RunConfig& c) -> bool& { return c.pipeline.skip_baseline; }));
        f.push_back(real("window.length_s", [](RunConfig& c) -> double& { return c.pipeline.window.length_s; }));
        f.push_back(real("window.overlap", [](RunConfig& c) -> double& { return c.pipeline.window.overlap_frac; }));
        f.push_back({"window.mode",
                     [](RunConfig& c, const std::string& v) {
                         if (v == "fixed") {
                             c.pipeline.window.mode = WindowMode::Fixed;
                         } else if (v == "sliding") {
                             c.pipeline.window.mode = WindowMode::Sliding;
                         } else {
                             bad_value("window.mode", v, "fixed or sliding");
                         }
                     },
                     [](const RunConfig& c) {
                         return std::string(c.pipeline.window.mode == WindowMode::Fixed ? "fixed" : "sliding");
                     }});
        f.push_back(boolean("preprocess.standardize", [](RunConfig& c) -> bool& { return c.pipeline.model.standardize; }));
        f.push_back(boolean("pca.enabled", [](RunConfig& c) -> bool& { return c.pipeline.model.use_pca; }));
        f.push_back(real("pca.variance_target", [](RunConfig& c) -> double& { return c.pipeline.model.pca_variance; }));
        f.push_back({"svm.kernel",
                     [](RunConfig& c, const std::string& v) {
                         if (v == "rbf") {
                             c.pipeline.model.kernel.kind = KernelKind::Rbf;
                         } else if (v == "linear") {
                             c.pipeline.model.kernel.kind = KernelKind::Linear;
                         } else {
                             bad_value("svm.kernel", v, "rbf or linear");
                         }
                     },
                     [](const RunConfig& c) {
                         return std::string(c.pipeline.model.kernel.kind == KernelKind::Rbf ? "rbf" : "linear");
                     }});
        f.push_back(real("svm.gamma", [](RunConfig& c) -> double& { return c.pipeline.model.kernel.gamma; }));
        f.push_back(real("svm.c", [](RunConfig& c) -> double& { return c.pipeline.model.train.c; }));
        f.push_back(real("svm.tol", [](RunConfig& c) -> double& { return c.pipeline.model.train.tol; }));
        f.push_back(integer("svm.max_passes", [](RunConfig& c) -> int& { return c.pipeline.model.train.max_passes; }));
        f.push_back(integer("svm.max_sweeps", [](RunConfig& c) -> int& { return c.pipeline.model.train.max_sweeps; }));
        f.push_back(integer("svm.cache_mb", [](RunConfig& c) -> std::size_t& { return c.pipeline.model.train.cache_mb; }));
        f.push_back(boolean("parallel", [](RunConfig& c) -> bool& { return c.pipeline.parallel; }));

        f.push_back(real("events.smooth_s", [](RunConfig& c) -> double& { return c.events.smooth_s; }));
        f.push_back(real("events.theta_factor", [](RunConfig& c) -> double& { return c.events.theta_factor; }));
        f.push_back(real("events.release_factor", [](RunConfig& c) -> double& { return c.events.release_factor; }));
        f.push_back(real("events.min_event_gap_s", [](RunConfig& c) -> double& { return c.events.min_event_gap_s; }));
        f.push_back(real("events.min_prominence", [](RunConfig& c) -> double& { return c.events.min_prominence; }));
        f.push_back(real("events.min_peak_gap_s", [](RunConfig& c) -> double& { return c.events.min_peak_gap_s; }));
        f.push_back(real("events.loss_factor", [](RunConfig& c) -> double& { return c.events.loss_factor; }));
        f.push_back(real("events.rolling_s", [](RunConfig& c) -> double& { return c.events.rolling_s; }));
        f.push_back(real("events.sustain_s", [](RunConfig& c) -> double& { return c.events.sustain_s; }));
        f.push_back(boolean("events.invert", [](RunConfig& c) -> bool& { return c.events.invert; }));
        f.push_back(real("rest.start_s", [](RunConfig& c) -> double& { return c.rest.start_s; }));
        f.push_back(real("rest.end_s", [](RunConfig& c) -> double& { return c.rest.end_s; }));
        f.push_back(real("chair.window_s", [](RunConfig& c) -> double& { return c.chair_window_s; }));
        f.push_back(real("chair.start_s", [](RunConfig& c) -> double& { return c.chair_start_s; }));

        f.push_back(integer("sim.subjects", [](RunConfig& c) -> int& { return c.sim.subjects; }));
        f.push_back(integer("sim.sets", [](RunConfig& c) -> int& { return c.sim.sets_per_motion; }));
        f.push_back(real("sim.trial_s", [](RunConfig& c) -> double& { return c.sim.trial_s; }));
        f.push_back(real("sim.sample_rate_hz", [](RunConfig& c) -> double& { return c.sim.sample_rate_hz; }));
        f.push_back(real("sim.noise_sigma", [](RunConfig& c) -> double& { return c.sim.noise_sigma; }));
        f.push_back(real("sim.drift_per_s", [](RunConfig& c) -> double& { return c.sim.drift_per_s; }));
        f.push_back(real("sim.subject_scale_sigma", [](RunConfig& c) -> double& { return c.sim.subject_scale_sigma; }));
        f.push_back(real("sim.gain_jitter", [](RunConfig& c) -> double& { return c.sim.gain_jitter; }));
        f.push_back(real("sim.set_jitter", [](RunConfig& c) -> double& { return c.sim.set_jitter; }));
        f.push_back(real("sim.burst_jitter", [](RunConfig& c) -> double& { return c.sim.burst_jitter; }));
        f.push_back(real("sim.timing_jitter_s", [](RunConfig& c) -> double& { return c.sim.timing_jitter_s; }));
        f.push_back(real("sim.preamble_s", [](RunConfig& c) -> double& { return c.sim.preamble_s; }));
        f.push_back(real("sim.v0", [](RunConfig& c) -> double& { return c.sim.v0; }));
        f.push_back(real("sim.knee_kpa", [](RunConfig& c) -> double& { return c.sim.pressure.knee_kpa; }));
        f.push_back(real("sim.s_low", [](RunConfig& c) -> double& { return c.sim.pressure.s_low; }));
        f.push_back(real("sim.s_high", [](RunConfig& c) -> double& { return c.sim.pressure.s_high; }));
        f.push_back(real("sim.saturation", [](RunConfig& c) -> double& { return c.sim.pressure.saturation; }));
        f.push_back(real("sim.gait.cycle_s", [](RunConfig& c) -> double& { return c.health.gait.cycle_s; }));
        f.push_back(real("sim.gait.duty", [](RunConfig& c) -> double& { return c.health.gait.duty; }));
        f.push_back(real("sim.gait.walk_s", [](RunConfig& c) -> double& { return c.health.gait.walk_s; }));
        f.push_back(real("sim.gait.amplitude_kpa", [](RunConfig& c) -> double& { return c.health.gait.amplitude_kpa; }));
        f.push_back(real("sim.gait.edge_s", [](RunConfig& c) -> double& { return c.health.gait.edge_s; }));
        f.push_back(real("sim.gait.lead_s", [](RunConfig& c) -> double& { return c.health.gait.lead_s; }));
        f.push_back(integer("sim.chair.repetitions", [](RunConfig& c) -> int& { return c.health.chair.repetitions; }));
        f.push_back(real("sim.chair.test_s", [](RunConfig& c) -> double& { return c.health.chair.test_s; }));
        f.push_back(real("sim.chair.burst_s", [](RunConfig& c) -> double& { return c.health.chair.burst_s; }));
        f.push_back(real("sim.chair.amplitude_kpa", [](RunConfig& c) -> double& { return c.health.chair.amplitude_kpa; }));
        f.push_back(real("sim.chair.jitter_s", [](RunConfig& c) -> double& { return c.health.chair.jitter_s; }));
        f.push_back(real("sim.tandem.shake_s", [](RunConfig& c) -> double& { return c.health.tandem.shake_s; }));
        f.push_back({"sim.tandem.loss_s",
                     [](RunConfig& c, const std::string& v) {
                         if (v.empty() || v == "none") {
                             c.health.tandem.loss_s.reset();
                         } else {
                             c.health.tandem.loss_s = parse_real("sim.tandem.loss_s", v);
                         }
                     },
                     [](const RunConfig& c) {
                         return c.health.tandem.loss_s ? textio::fmt17(*c.health.tandem.loss_s) : std::string("none");
                     }});
        f.push_back(real("sim.tandem.duration_s", [](RunConfig& c) -> double& { return c.health.tandem.duration_s; }));
        f.push_back(real("sim.tandem.shake_hz", [](RunConfig& c) -> double& { return c.health.tandem.shake_hz; }));
        f.push_back(real("sim.tandem.shake_kpa", [](RunConfig& c) -> double& { return c.health.tandem.shake_kpa; }));
        f.push_back(real("sim.tandem.loss_kpa", [](RunConfig& c) -> double& { return c.health.tandem.loss_kpa; }));

        f.push_back(real("adc.vref", [](RunConfig& c) -> double& { return c.adc_vref; }));
        f.push_back(integer("adc.bits", [](RunConfig& c) -> int& { return c.adc_bits; }));
        f.push_back(real("stream.rate_multiplier", [](RunConfig& c) -> double& { return c.rate_multiplier; }));
        return f;
    }();
    return table;
}

const Field& find_field(const std::string& key) {
    for (const auto& f : fields()) {
        if (f.key == key) return f;
    }
    throw Error(Errc::InvalidArgument, "unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    find_field(key).set(*this, trim(value));
}

std::string RunConfig::get(const std::string& key) const { return find_field(key).get(*this); }

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
}

void RunConfig::load(std::istream& in, const std::string& origin) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(Errc::InvalidArgument, origin + ":" + std::to_string(line_no) + ": expected key=value");
        }
        try {
            set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(e.code(), origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open config " + path.string());
    load(in, path.string());
}

void RunConfig::resolve() {
    sim.seed = derive_seed(seed, 1);
    pipeline.split_seed = derive_seed(seed, 2);
    pipeline.model.train.seed = derive_seed(seed, 3);

    pipeline.window.validate();
    if (pipeline.model.kernel.gamma != 0.0) pipeline.model.kernel.validate();  // 0 = auto
    pipeline.model.train.validate();
    sim.validate();
    events.validate();
    if (!(pipeline.baseline_window_s > 0.0)) {
        throw Error(Errc::InvalidArgument, "baseline.window_s must be positive");
    }
    if (!(pipeline.model.pca_variance > 0.0 && pipeline.model.pca_variance <= 1.0)) {
        throw Error(Errc::InvalidArgument, "pca.variance_target must lie in (0, 1]");
    }
    if (adc_bits < 1 || adc_bits > 16 || !(adc_vref > 0.0)) {
        throw Error(Errc::InvalidArgument, "adc.bits must be 1..16 and adc.vref positive");
    }
    if (!(rate_multiplier > 0.0)) {
        throw Error(Errc::InvalidArgument, "stream.rate_multiplier must be positive");
    }
    if (!(chair_window_s > 0.0) || chair_start_s < 0.0) {
        throw Error(Errc::InvalidArgument, "chair.window_s must be positive and chair.start_s >= 0");
    }
}

void RunConfig::write(std::ostream& out) const {
    for (const auto& f : fields()) out << f.key << '=' << f.get(*this) << '\n';
}

void RunConfig::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    write(out);
}

}  // namespace calfsense
