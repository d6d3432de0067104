#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "calfsense/matrix.hpp"

namespace calfsense {

enum class KernelKind { Linear, Rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 0.0;  // rbf only; 0 asks the multi-class trainer to pick it

    static KernelSpec linear() { return {KernelKind::Linear, 0.0}; }
    static KernelSpec rbf(double gamma) { return {KernelKind::Rbf, gamma}; }
    // Throws InvalidArgument unless rbf gamma is finite and positive.
    void validate() const;
};

// linear: u.v   rbf: exp(-gamma |u - v|^2). Throws DimensionMismatch.
double kernel_eval(const KernelSpec& kernel, std::span<const double> u, std::span<const double> v);

struct TrainConfig {
    double c = 1.0;
    double tol = 1e-3;
    int max_passes = 10;
    std::uint64_t seed = 0;
    // Cap on simplified-SMO sweeps before the pair-selection finish takes over.
    int max_sweeps = 100;
    std::size_t cache_mb = 256;

    void validate() const;
};

struct BinaryModel {
    Matrix support_vectors;
    std::vector<double> alphas;            // one per support vector, in (0, c]
    std::vector<int> sv_labels;            // +1 / -1
    std::vector<std::size_t> sv_indices;   // rows of the training matrix
    double bias = 0.0;
    double c = 1.0;
    KernelSpec kernel;

    // sum_i alpha_i y_i k(sv_i, x) + b
    double decision(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

struct TrainStats {
    int sweeps = 0;
    std::size_t smo_updates = 0;
    std::size_t finish_updates = 0;
    double final_gap = 0.0;  // largest KKT pair violation at exit
};

struct BinaryFit {
    BinaryModel model;
    std::vector<double> alphas;  // full dual vector, one per training row
    TrainStats stats;
};

// Soft-margin SVM dual solved by simplified SMO (random second index, seeded),
// then finished with maximal-violating-pair steps until the KKT gap is below
// tol. The bias is placed mid-interval so every point meets its KKT condition
// to within tol. Errors: SingleClassInput, NonFiniteInput, DimensionMismatch,
// InvalidArgument.
BinaryFit train_binary_fit(const Matrix& x, std::span<const int> y, const KernelSpec& kernel,
                           const TrainConfig& cfg);
BinaryModel train_binary(const Matrix& x, std::span<const int> y, const KernelSpec& kernel,
                         const TrainConfig& cfg);

// Largest KKT violation over the training set:
//   a = 0      -> max(0, 1 - y f)
//   0 < a < c  -> |y f - 1|
//   a = c      -> max(0, y f - 1)
double kkt_residual(const Matrix& x, std::span<const int> y, std::span<const double> alphas,
                    const BinaryModel& model);

}  // namespace calfsense
