#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "calfsense/error.hpp"
#include "calfsense/evaluation.hpp"
#include "calfsense/features.hpp"
#include "calfsense/multiclass.hpp"
#include "calfsense/windowing.hpp"

namespace calfsense {

struct PipelineConfig {
    WindowSpec window;
    double baseline_window_s = kDefaultBaselineWindowS;
    bool skip_baseline = true;  // windows start after the baseline rest
    MultiClassConfig model;
    std::uint64_t split_seed = 0;
    bool parallel = true;
};

// Runs fn and tags any Error it throws with the stage name.
template <class Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw e.with_stage(stage);
    }
}

// normalize -> segment -> featurize for every session, in order.
std::vector<FeatureVector> extract_features(std::span<const Session> sessions, const PipelineConfig& cfg);

struct PipelineResult {
    SplitResult split;
    MultiClassModel model;
    Evaluation evaluation;
    double train_seconds = 0.0;
};

// split -> standardize -> PCA -> SVM -> evaluate.
PipelineResult train_and_evaluate(std::span<const FeatureVector> features, const PipelineConfig& cfg);

// Reads manifest.csv and every session it lists. Errors: IoError,
// MalformedHeader, RowArity, plus CSV errors naming the file.
std::vector<Session> load_dataset(const std::filesystem::path& dir);

struct SweepRow {
    WindowSpec window;
    std::size_t windows = 0;
    double macro_recall = 0.0;
    double seconds = 0.0;
    bool best = false;
};

// {2, 4, 6} s crossed with {fixed, 25 %, 30 %, 50 %, 60 %} overlap.
std::vector<WindowSpec> sweep_grid();
// Best row: highest macro recall, ties to the shorter window, then to the earlier row.
std::vector<SweepRow> sweep_windows(std::span<const Session> sessions, const PipelineConfig& base);
void mark_best(std::vector<SweepRow>& rows);
void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);

}  // namespace calfsense
