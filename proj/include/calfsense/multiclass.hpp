#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "calfsense/core.hpp"
#include "calfsense/pca.hpp"
#include "calfsense/svm.hpp"

namespace calfsense {

// Zero-mean / unit-variance scaling fitted on training data. Constant
// columns get scale 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x);
    std::vector<double> apply(std::span<const double> x) const;
    Matrix apply_rows(const Matrix& x) const;
};

struct MultiClassConfig {
    KernelSpec kernel;              // rbf gamma 0 = 1 / (d * mean feature variance)
    TrainConfig train;
    bool standardize = true;
    bool use_pca = true;
    double pca_variance = 0.95;
    bool parallel = true;           // train pairs concurrently (results unchanged)
};

struct PairModel {
    std::size_t positive = 0;  // index into classes, label +1
    std::size_t negative = 0;  // label -1
    BinaryModel model;
};

struct MultiClassModel {
    std::vector<MotionLabel> classes;  // ascending
    std::optional<Standardizer> standardizer;
    std::optional<PcaModel> pca;
    KernelSpec kernel;
    TrainConfig train;
    std::vector<PairModel> pairs;      // (0,1), (0,2), ..., (K-2,K-1)

    std::vector<double> preprocess(std::span<const double> features) const;
    // Majority vote; ties go to the larger summed |decision| of won duels,
    // then to the earlier class.
    MotionLabel predict(std::span<const double> features) const;
    std::vector<MotionLabel> predict_batch(const Matrix& features, bool parallel = true) const;
};

// Seed for pair p, derived from the root seed so results do not depend on
// scheduling.
std::uint64_t pair_seed(std::uint64_t root, std::size_t pair_index) noexcept;

// Errors: SingleClassInput (< 2 classes), ClassTooSmall (names the class),
// DimensionMismatch, plus anything from PCA or the binary trainer.
MultiClassModel train_multiclass(const Matrix& features, std::span<const MotionLabel> labels,
                                 const MultiClassConfig& cfg);

// Text format "calfsense-model 1", 17 significant digits.
void save_model(const MultiClassModel& model, std::ostream& out);
MultiClassModel load_model(std::istream& in);

}  // namespace calfsense
