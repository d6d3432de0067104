#include "calfsense/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <utility>

#include "calfsense/error.hpp"

namespace calfsense {

SplitResult split_dataset(std::span<const FeatureVector> features, std::uint64_t seed) {
    using GroupKey = std::pair<std::string, MotionLabel>;
    std::map<GroupKey, std::set<int>> sets;
    for (const auto& fv : features) {
        sets[{fv.provenance.subject, fv.provenance.motion}].insert(fv.provenance.set_index);
    }

    SplitResult result;
    std::mt19937_64 rng(seed);
    std::map<GroupKey, std::set<int>> train_sets;
    for (const auto& [key, available] : sets) {
        std::vector<int> order(available.begin(), available.end());
        // Fisher-Yates with raw engine output keeps the split identical across standard libraries.
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(order[i - 1], order[j]);
        }
        std::size_t n_train = order.size() / 2;
        if (order.size() != 4) {
            n_train = (order.size() + 1) / 2;
            result.warnings.push_back("MissingSets: subject " + key.first + " motion " +
                                      std::string(to_string(key.second)) + " has " +
                                      std::to_string(order.size()) + " set(s), expected 4");
        }
        train_sets[key] = std::set<int>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    }

    for (const auto& fv : features) {
        const auto& chosen = train_sets[{fv.provenance.subject, fv.provenance.motion}];
        if (chosen.count(fv.provenance.set_index)) {
            result.train.push_back(fv);
        } else {
            result.test.push_back(fv);
        }
    }
    return result;
}

ConfusionMatrix::ConfusionMatrix(std::vector<MotionLabel> labels)
    : classes(std::move(labels)), counts(classes.size(), std::vector<std::uint64_t>(classes.size(), 0)) {}

std::size_t ConfusionMatrix::index_of(MotionLabel label) const {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) {
        throw Error(Errc::UnknownLabel, "label " + std::string(to_string(label)) +
                                            " is not one of the model's classes");
    }
    return static_cast<std::size_t>(it - classes.begin());
}

void ConfusionMatrix::add(MotionLabel truth, MotionLabel predicted) {
    ++counts[index_of(truth)][index_of(predicted)];
}

std::uint64_t ConfusionMatrix::row_total(std::size_t i) const {
    std::uint64_t total = 0;
    for (auto v : counts[i]) total += v;
    return total;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
    Metrics m;
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        const std::uint64_t total = cm.row_total(i);
        correct += cm.counts[i][i];
        m.n_samples += total;
        if (total == 0) continue;
        const std::uint64_t tp = cm.counts[i][i];
        const std::uint64_t fn = total - tp;
        m.classes.push_back(cm.classes[i]);
        m.recall_per_class.push_back(static_cast<double>(tp) / static_cast<double>(tp + fn));
    }
    m.n_classes = m.classes.size();
    double sum = 0.0;
    for (double r : m.recall_per_class) sum += r;
    m.macro_recall = m.n_classes ? sum / static_cast<double>(m.n_classes) : 0.0;
    m.accuracy = m.n_samples ? static_cast<double>(correct) / static_cast<double>(m.n_samples) : 0.0;
    return m;
}

Evaluation evaluate(const MultiClassModel& model, std::span<const FeatureVector> test, bool parallel) {
    if (test.empty()) throw Error(Errc::InvalidArgument, "test set is empty");
    ConfusionMatrix cm(model.classes);
    for (const auto& fv : test) cm.index_of(fv.label);

    const auto predictions = model.predict_batch(to_matrix(test), parallel);
    for (std::size_t i = 0; i < test.size(); ++i) cm.add(test[i].label, predictions[i]);
    Evaluation ev{cm, compute_metrics(cm)};
    return ev;
}

void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out) {
    out << "true\\pred";
    for (auto c : cm.classes) out << ',' << to_string(c);
    out << '\n';
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        out << to_string(cm.classes[i]);
        for (auto v : cm.counts[i]) out << ',' << v;
        out << '\n';
    }
}

void write_metrics_report(const Metrics& metrics, std::ostream& out) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", metrics.macro_recall);
    out << "macro_recall=" << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.6f", metrics.accuracy);
    out << "accuracy=" << buf << '\n';
    out << "n_classes=" << metrics.n_classes << '\n';
    out << "n_test_samples=" << metrics.n_samples << '\n';
    for (std::size_t i = 0; i < metrics.classes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f", metrics.recall_per_class[i]);
        out << "recall." << to_string(metrics.classes[i]) << '=' << buf << '\n';
    }
}

}  // namespace calfsense
