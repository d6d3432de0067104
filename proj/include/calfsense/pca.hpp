#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "calfsense/matrix.hpp"

namespace calfsense {

struct PcaModel {
    std::vector<double> mean;         // input dimension d
    Matrix components;                // k x d, rows are unit principal axes
    std::vector<double> eigenvalues;  // k, descending, non-negative
    double total_variance = 0.0;      // trace of the sample covariance
    std::size_t k() const noexcept { return components.rows(); }
    std::size_t dim() const noexcept { return mean.size(); }

    double explained_fraction(std::size_t j) const noexcept {
        return total_variance > 0.0 ? eigenvalues[j] / total_variance : 0.0;
    }
};

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // row i is the eigenvector for values[i]
};

// Cyclic Jacobi rotations until off-diagonal mass is negligible. Equal
// eigenvalues keep the order of their originating diagonal index.
SymmetricEigen symmetric_eigen(const Matrix& a);

// Sample covariance with the 1/(m-1) divisor.
Matrix sample_covariance(const Matrix& x, std::span<const double> mean);

// Centres the data, eigendecomposes the covariance and keeps the fewest
// components whose cumulative variance fraction reaches variance_target.
// Each axis is signed so its largest-magnitude entry is positive.
// Errors: TooFewSamples (m < 2), NonFiniteInput, InvalidArgument.
PcaModel fit_pca(const Matrix& x, double variance_target = 0.95);

// components * (x - mean). Throws DimensionMismatch.
std::vector<double> pca_transform(const PcaModel& model, std::span<const double> x);
Matrix pca_transform_rows(const PcaModel& model, const Matrix& x);
// mean + components^T * z
std::vector<double> pca_inverse(const PcaModel& model, std::span<const double> z);

// Text format "calfsense-pca 1", 17 significant digits.
void save_pca(const PcaModel& model, std::ostream& out);
PcaModel load_pca(std::istream& in);

}  // namespace calfsense
