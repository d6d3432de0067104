#include "calfsense/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "calfsense/csv_io.hpp"

namespace calfsense {

namespace {

std::vector<FeatureVector> session_features(const Session& session, const PipelineConfig& cfg) {
    const auto baseline = run_stage("baseline", [&] {
        return estimate_baseline(session.frames, cfg.baseline_window_s);
    });
    const auto series = run_stage("normalize", [&] { return normalize(session, baseline); });
    const std::size_t first =
        cfg.skip_baseline
            ? static_cast<std::size_t>(std::llround(cfg.baseline_window_s * series.sample_rate_hz))
            : 0;
    const auto windows = run_stage("segment", [&] { return segment_from(series, cfg.window, first); });
    return run_stage("featurize", [&] {
        std::vector<FeatureVector> out;
        out.reserve(windows.size());
        for (const auto& w : windows) out.push_back(featurize(w));
        return out;
    });
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::vector<FeatureVector> extract_features(std::span<const Session> sessions, const PipelineConfig& cfg) {
    cfg.window.validate();
    std::vector<std::vector<FeatureVector>> per_session(sessions.size());
    std::vector<std::optional<Error>> failures(sessions.size());
    const auto n = static_cast<std::ptrdiff_t>(sessions.size());
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            per_session[idx] = session_features(sessions[idx], cfg);
        } catch (const Error& e) {
            failures[idx] = e;
        }
    }
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (failures[i]) {
            const auto& s = sessions[i];
            throw Error(failures[i]->code(), "session " + s.subject_id + "/" + std::string(to_string(s.motion)) +
                                                 "/" + std::to_string(s.set_index) + ": " + failures[i]->what())
                .with_stage(failures[i]->stage());
        }
    }
    std::vector<FeatureVector> out;
    for (auto& v : per_session) out.insert(out.end(), v.begin(), v.end());
    return out;
}

PipelineResult train_and_evaluate(std::span<const FeatureVector> features, const PipelineConfig& cfg) {
    PipelineResult result;
    result.split = run_stage("split", [&] { return split_dataset(features, cfg.split_seed); });
    if (result.split.test.empty()) {
        throw Error(Errc::InsufficientData, "split left no test windows; each group needs two or more sets")
            .with_stage("split");
    }

    const auto start = std::chrono::steady_clock::now();
    result.model = run_stage("train", [&] {
        std::vector<MotionLabel> labels;
        labels.reserve(result.split.train.size());
        for (const auto& fv : result.split.train) labels.push_back(fv.label);
        auto mc = cfg.model;
        mc.parallel = mc.parallel && cfg.parallel;
        return train_multiclass(to_matrix(result.split.train), labels, mc);
    });
    result.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    result.evaluation = run_stage("evaluate", [&] { return evaluate(result.model, result.split.test, cfg.parallel); });
    return result;
}

std::vector<Session> load_dataset(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.csv";
    std::ifstream in(manifest_path);
    if (!in) throw Error(Errc::IoError, "cannot open " + manifest_path.string());

    std::string line;
    if (!std::getline(in, line) || line.rfind("file,subject,motion,set", 0) != 0) {
        throw Error(Errc::MalformedHeader, manifest_path.string() + ":1: expected file,subject,motion,set,...");
    }
    struct Row {
        std::string file;
        std::string subject;
        MotionLabel motion;
        int set;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < 4) {
            throw Error(Errc::RowArity, manifest_path.string() + ":" + std::to_string(line_no) +
                                            ": expected at least 4 cells");
        }
        Row r{cells[0], cells[1], parse_motion(cells[2]), 0};
        try {
            r.set = std::stoi(cells[3]);
        } catch (const std::exception&) {
            throw Error(Errc::NonNumericCell, manifest_path.string() + ":" + std::to_string(line_no) +
                                                  ": set '" + cells[3] + "'");
        }
        rows.push_back(std::move(r));
    }

    std::vector<Session> sessions(rows.size());
    std::vector<std::optional<Error>> failures(rows.size());
    const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            auto s = read_csv(dir / rows[idx].file);
            s.subject_id = rows[idx].subject;
            s.motion = rows[idx].motion;
            s.set_index = rows[idx].set;
            sessions[idx] = std::move(s);
        } catch (const Error& e) {
            failures[idx] = Error(e.code(), rows[idx].file + ": " + e.what());
        }
    }
    for (auto& f : failures) {
        if (f) throw *f;
    }
    return sessions;
}

std::vector<WindowSpec> sweep_grid() {
    std::vector<WindowSpec> grid;
    for (double len : {2.0, 4.0, 6.0}) {
        grid.push_back(WindowSpec::fixed(len));
        for (double ov : {0.25, 0.30, 0.50, 0.60}) grid.push_back(WindowSpec::sliding(len, ov));
    }
    return grid;
}

void mark_best(std::vector<SweepRow>& rows) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto& b = rows[best];
        if (r.macro_recall > b.macro_recall ||
            (r.macro_recall == b.macro_recall && r.window.length_s < b.window.length_s)) {
            best = i;
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].best = (i == best);
}

std::vector<SweepRow> sweep_windows(std::span<const Session> sessions, const PipelineConfig& base) {
    std::vector<SweepRow> rows;
    for (const auto& spec : sweep_grid()) {
        auto cfg = base;
        cfg.window = spec;
        const auto start = std::chrono::steady_clock::now();
        const auto features = extract_features(sessions, cfg);
        const auto result = train_and_evaluate(features, cfg);
        SweepRow row;
        row.window = spec;
        row.windows = features.size();
        row.macro_recall = result.evaluation.metrics.macro_recall;
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(row);
    }
    if (!rows.empty()) mark_best(rows);
    return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
    out << "window_s,mode,overlap,windows,macro_recall,runtime_s,best\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.1f,%s,%.2f,%zu,%.6f,%.3f,%d\n", r.window.length_s,
                      r.window.mode == WindowMode::Fixed ? "fixed" : "sliding", r.window.effective_overlap(),
                      r.windows, r.macro_recall, r.seconds, r.best ? 1 : 0);
        out << buf;
    }
}

}  // namespace calfsense
