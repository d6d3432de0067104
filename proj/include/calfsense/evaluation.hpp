#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "calfsense/features.hpp"
#include "calfsense/multiclass.hpp"

namespace calfsense {

struct SplitResult {
    std::vector<FeatureVector> train;
    std::vector<FeatureVector> test;
    std::vector<std::string> warnings;  // one per (subject, motion) without 4 sets
};

// Whole recording sets go to one side: 2 train / 2 test per (subject, motion),
// chosen by a seeded shuffle. Groups with another set count fall back to
// ceil(n/2) train sets and emit a MissingSets warning.
SplitResult split_dataset(std::span<const FeatureVector> features, std::uint64_t seed);

struct ConfusionMatrix {
    std::vector<MotionLabel> classes;
    std::vector<std::vector<std::uint64_t>> counts;  // [true][predicted]

    explicit ConfusionMatrix(std::vector<MotionLabel> labels = {});
    std::size_t index_of(MotionLabel label) const;  // throws UnknownLabel
    void add(MotionLabel truth, MotionLabel predicted);
    std::uint64_t row_total(std::size_t i) const;
};

struct Metrics {
    std::vector<MotionLabel> classes;    // classes with at least one test sample
    std::vector<double> recall_per_class;
    double macro_recall = 0.0;
    std::size_t n_classes = 0;
    std::size_t n_samples = 0;
    double accuracy = 0.0;
};

// recall_i = TP / (TP + FN) per row; macro recall is the unweighted mean over
// the classes present in the test data.
Metrics compute_metrics(const ConfusionMatrix& cm);

struct Evaluation {
    ConfusionMatrix confusion;
    Metrics metrics;
};

// Errors: InvalidArgument for an empty test set, UnknownLabel.
Evaluation evaluate(const MultiClassModel& model, std::span<const FeatureVector> test,
                    bool parallel = true);

void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out);
void write_metrics_report(const Metrics& metrics, std::ostream& out);

}  // namespace calfsense
