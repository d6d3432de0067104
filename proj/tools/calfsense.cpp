// calfsense: simulate, ingest, train and assess 16-channel calf pressure recordings.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "calfsense/config.hpp"
#include "calfsense/csv_io.hpp"
#include "calfsense/error.hpp"
#include "calfsense/health.hpp"
#include "calfsense/ingest.hpp"
#include "calfsense/pipeline.hpp"
#include "calfsense/simulator.hpp"

namespace fs = std::filesystem;
using namespace calfsense;

namespace {

struct Globals {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::vector<std::string> overrides;
};

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw Error(Errc::InvalidArgument, "--set expects key=value, got '" + assignment + "'");
    }
    cfg.set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

fs::path prepare_out(const Globals& g) {
    fs::path out(g.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + out.string() + ": " + ec.message());
    return out;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
    return f;
}

NormalizedSeries load_series(const std::string& input, const RunConfig& cfg) {
    const auto session = run_stage("load", [&] { return read_csv(fs::path(input)); });
    const auto baseline = run_stage("baseline", [&] {
        return estimate_baseline(session.frames, cfg.pipeline.baseline_window_s);
    });
    return run_stage("normalize", [&] { return normalize(session, baseline); });
}

void print_metrics(const Metrics& m) {
    std::printf("macro_recall=%.4f accuracy=%.4f classes=%zu test_windows=%zu\n", m.macro_recall,
                m.accuracy, m.n_classes, m.n_samples);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"calfsense: calf pressure-sensor motion recognition and health assessment"};
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config_file, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "root seed for every random stage");
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--set", g.overrides, "override a config key (key=value), repeatable");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic corpus or a health scenario");
    std::optional<int> subjects;
    std::string scenario;
    std::string motion;
    int subject = 1;
    int set_index = 1;
    std::string stream_to;
    std::optional<int> repetitions;
    sim_cmd->add_option("--subjects", subjects, "subjects in the corpus");
    sim_cmd->add_option("--scenario", scenario, "gait | chairstand | tandem")
        ->check(CLI::IsMember({"gait", "chairstand", "tandem"}));
    sim_cmd->add_option("--motion", motion, "single recording of this motion (A1..A10, REST)");
    sim_cmd->add_option("--subject", subject, "subject for --motion")->capture_default_str();
    sim_cmd->add_option("--set-index", set_index, "set for --motion")->capture_default_str();
    sim_cmd->add_option("--repetitions", repetitions, "chair-stand repetitions");
    sim_cmd->add_option("--stream", stream_to, "also stream the recording to host:port");
    sim_cmd->get_option("--scenario")->excludes("--motion");

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "receive a wire-format stream and store it as CSV");
    std::string listen = "127.0.0.1:9750";
    std::size_t connections = 1;
    std::string ingest_label;
    ingest_cmd->add_option("--listen", listen, "host:port")->capture_default_str();
    ingest_cmd->add_option("--connections", connections, "sessions to accept, 0 = forever")->capture_default_str();
    ingest_cmd->add_option("--label", ingest_label, "motion label for the stored session");

    // train / evaluate / sweep
    std::string data_dir;
    std::string model_path;
    auto* train_cmd = app.add_subcommand("train", "split, train and score a dataset");
    train_cmd->add_option("--data", data_dir, "dataset directory with manifest.csv")->required();
    auto* eval_cmd = app.add_subcommand("evaluate", "score a saved model on the dataset's test split");
    eval_cmd->add_option("--data", data_dir, "dataset directory with manifest.csv")->required();
    eval_cmd->add_option("--model", model_path, "model file written by train")->required();
    auto* sweep_cmd = app.add_subcommand("sweep", "macro recall over window lengths and overlaps");
    sweep_cmd->add_option("--data", data_dir, "dataset directory with manifest.csv")->required();

    // health
    std::string input;
    std::optional<double> rest_start, rest_end, test_start;
    bool invert = false;
    auto* gait_cmd = app.add_subcommand("gait", "stance / swing phases and cadence");
    auto* chair_cmd = app.add_subcommand("chairstand", "30-second chair-stand count");
    auto* tandem_cmd = app.add_subcommand("tandem", "tandem-stance shake onset and balance loss");
    for (auto* cmd : {gait_cmd, chair_cmd, tandem_cmd}) {
        cmd->add_option("input", input, "session CSV")->required()->check(CLI::ExistingFile);
    }
    for (auto* cmd : {gait_cmd, tandem_cmd}) {
        cmd->add_option("--rest-start", rest_start, "rest segment start (s)");
        cmd->add_option("--rest-end", rest_end, "rest segment end (s)");
    }
    gait_cmd->add_flag("--invert", invert, "stance is low activation");
    chair_cmd->add_option("--test-start", test_start, "start of the counting window (s)");

    CLI11_PARSE(app, argc, argv);

    const char* stage = "config";
    try {
        RunConfig cfg;
        if (!g.config_file.empty()) cfg.load(fs::path(g.config_file));
        for (const auto& o : g.overrides) apply_override(cfg, o);
        if (g.seed) cfg.seed = *g.seed;
        if (subjects) cfg.sim.subjects = *subjects;
        if (repetitions) cfg.health.chair.repetitions = *repetitions;
        if (rest_start) cfg.rest.start_s = *rest_start;
        if (rest_end) cfg.rest.end_s = *rest_end;
        if (test_start) cfg.chair_start_s = *test_start;
        if (invert) cfg.events.invert = true;
        cfg.resolve();

        stage = "output";
        const fs::path out = prepare_out(g);
        cfg.write(out / "run_config.txt");

        if (*sim_cmd) {
            stage = "simulate";
            std::optional<Session> to_stream;
            if (!scenario.empty()) {
                const auto sc = *sim::parse_scenario(scenario);
                auto syn = sim::synth_health(sc, cfg.health, cfg.sim);
                write_csv(syn.session, out / (scenario + ".csv"));
                auto truth = open_out(out / (scenario + "_truth.txt"));
                sim::write_ground_truth(syn.truth, truth);
                std::printf("wrote %s (%zu frames)\n", (out / (scenario + ".csv")).c_str(),
                            syn.session.frames.size());
                to_stream = std::move(syn.session);
            } else if (!motion.empty()) {
                auto syn = sim::synth_session(parse_motion(motion), subject, set_index, cfg.sim);
                const auto name = syn.session.subject_id + "_" + std::string(to_string(syn.session.motion)) +
                                  "_" + std::to_string(set_index) + ".csv";
                write_csv(syn.session, out / name);
                auto truth = open_out(out / "ground_truth.txt");
                sim::write_ground_truth(syn.truth, truth);
                std::printf("wrote %s (%zu frames)\n", (out / name).c_str(), syn.session.frames.size());
                to_stream = std::move(syn.session);
            } else {
                if (!stream_to.empty()) {
                    throw Error(Errc::InvalidArgument, "--stream needs --scenario or --motion");
                }
                const auto entries = sim::export_dataset(out, cfg.sim);
                std::printf("wrote %zu sessions to %s\n", entries.size(), out.c_str());
            }
            if (!stream_to.empty() && to_stream) {
                stage = "stream";
                const auto stats = sim::stream_session(*to_stream, net::Endpoint::parse(stream_to),
                                                       cfg.rate_multiplier, cfg.adc());
                std::printf("streamed %llu frames in %.2f s\n",
                            static_cast<unsigned long long>(stats.frames_sent), stats.elapsed_s);
            }
        } else if (*ingest_cmd) {
            stage = "ingest";
            Session session;
            session.subject_id = "S01";
            if (!ingest_label.empty()) session.motion = parse_motion(ingest_label);
            IngestOptions opts;
            opts.scale = cfg.adc();
            opts.max_connections = connections;
            IngestServer server(net::Endpoint::parse(listen));
            std::fprintf(stderr, "listening on port %u\n", static_cast<unsigned>(server.port()));
            const auto stats = server.serve([&](const SensorFrame& f) { session.frames.push_back(f); }, opts);
            if (session.frames.size() > 1) {
                const double span = static_cast<double>(session.frames.back().timestamp_us -
                                                        session.frames.front().timestamp_us) * 1e-6;
                if (span > 0.0) session.sample_rate_hz = static_cast<double>(session.frames.size() - 1) / span;
            }
            write_csv(session, out / "ingested.csv");
            auto report = open_out(out / "ingest_stats.txt");
            report << "frames_received=" << stats.frames_received << '\n'
                   << "frames_dropped=" << stats.frames_dropped << '\n'
                   << "gaps=" << stats.gaps << '\n'
                   << "crc_failures=" << stats.crc_failures << '\n'
                   << "version_failures=" << stats.version_failures << '\n'
                   << "out_of_range=" << stats.out_of_range << '\n'
                   << "out_of_order=" << stats.out_of_order << '\n'
                   << "bytes_discarded=" << stats.bytes_discarded << '\n'
                   << "connections=" << stats.connections << '\n';
            std::printf("received %llu frames, %llu dropped, %llu crc failures\n",
                        static_cast<unsigned long long>(stats.frames_received),
                        static_cast<unsigned long long>(stats.frames_dropped),
                        static_cast<unsigned long long>(stats.crc_failures));
        } else if (*train_cmd || *eval_cmd || *sweep_cmd) {
            stage = "load";
            const auto sessions = run_stage("load", [&] { return load_dataset(data_dir); });
            if (*sweep_cmd) {
                const auto rows = sweep_windows(sessions, cfg.pipeline);
                auto csv = open_out(out / "sweep.csv");
                write_sweep_csv(rows, csv);
                write_sweep_csv(rows, std::cout);
                return 0;
            }
            const auto features = extract_features(sessions, cfg.pipeline);
            MultiClassModel model;
            Evaluation ev;
            if (*train_cmd) {
                auto result = train_and_evaluate(features, cfg.pipeline);
                for (const auto& w : result.split.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
                model = std::move(result.model);
                ev = std::move(result.evaluation);
                stage = "output";
                auto mf = open_out(out / "model.txt");
                save_model(model, mf);
            } else {
                std::ifstream mf(model_path);
                if (!mf) throw Error(Errc::IoError, "cannot open model " + model_path);
                model = run_stage("model", [&] { return load_model(mf); });
                const auto split = run_stage("split", [&] { return split_dataset(features, cfg.pipeline.split_seed); });
                ev = run_stage("evaluate", [&] { return evaluate(model, split.test, cfg.pipeline.parallel); });
            }
            stage = "output";
            auto metrics = open_out(out / "metrics.txt");
            write_metrics_report(ev.metrics, metrics);
            auto confusion = open_out(out / "confusion.csv");
            write_confusion_csv(ev.confusion, confusion);
            print_metrics(ev.metrics);
        } else if (*gait_cmd) {
            const auto series = load_series(input, cfg);
            const auto report = run_stage("gait", [&] { return gait_analyze(series, cfg.events, cfg.rest); });
            stage = "output";
            auto rf = open_out(out / "gait_report.txt");
            write_report(report, cfg.events, rf);
            auto ef = open_out(out / "gait_events.csv");
            write_events_csv(report, ef);
            std::vector<double> starts;
            for (const auto& c : report.cycles) starts.push_back(c.start_s);
            auto pf = open_out(out / "gait_plot.csv");
            write_plot_csv(series, activation_envelope(series, cfg.events), report.threshold_high,
                           report.threshold_low, starts, pf);
            std::printf("cycles=%zu stance_pct=%.2f swing_pct=%.2f cadence=%.2f cycles/min\n", report.cycles.size(),
                        report.stance_pct, report.swing_pct, report.cadence_spm);
        } else if (*chair_cmd) {
            const auto series = load_series(input, cfg);
            const auto report = run_stage("chairstand", [&] {
                return chair_stand_count(series, cfg.events, cfg.chair_window_s, cfg.chair_start_s);
            });
            stage = "output";
            auto rf = open_out(out / "chairstand_report.txt");
            write_report(report, cfg.events, rf);
            auto ef = open_out(out / "chairstand_events.csv");
            write_events_csv(report, ef);
            auto pf = open_out(out / "chairstand_plot.csv");
            write_plot_csv(series, activation_envelope(series, cfg.events), cfg.events.min_prominence, 0.0,
                           report.stand_times_s, pf);
            std::printf("count=%zu in %.1f s\n", report.count, report.window_s);
        } else if (*tandem_cmd) {
            const auto series = load_series(input, cfg);
            const auto report = run_stage("tandem", [&] { return tandem_analyze(series, cfg.events, cfg.rest); });
            stage = "output";
            auto rf = open_out(out / "tandem_report.txt");
            write_report(report, cfg.events, rf);
            auto ef = open_out(out / "tandem_events.csv");
            write_events_csv(report, ef);
            std::vector<double> events;
            if (report.shake_onset_s) events.push_back(*report.shake_onset_s);
            if (report.balance_loss_s) events.push_back(*report.balance_loss_s);
            auto pf = open_out(out / "tandem_plot.csv");
            write_plot_csv(series, activation_envelope(series, cfg.events), report.shake_threshold,
                           report.loss_threshold, events, pf);
            auto fmt_opt = [](const std::optional<double>& v) {
                return v ? std::to_string(*v) : std::string("none");
            };
            std::printf("shake_onset_s=%s balance_loss_s=%s\n", fmt_opt(report.shake_onset_s).c_str(),
                        fmt_opt(report.balance_loss_s).c_str());
        }
    } catch (const Error& e) {
        const std::string where = e.stage().empty() ? stage : e.stage();
        std::fprintf(stderr, "error [%s]: %s\n", where.c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error [%s]: %s\n", stage, e.what());
        return 1;
    }
    return 0;
}
