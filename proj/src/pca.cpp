#include "calfsense/pca.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "calfsense/error.hpp"
#include "calfsense/textio.hpp"

namespace calfsense {

SymmetricEigen symmetric_eigen(const Matrix& input) {
    const std::size_t n = input.rows();
    if (input.cols() != n) throw Error(Errc::DimensionMismatch, "eigensolver needs a square matrix");

    Matrix a = input;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double frob = 0.0;
    for (double x : a.data()) frob += x * x;
    const double stop = frob * 1e-30;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off <= stop) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        out.values[r] = a(order[r], order[r]);
        for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = v(k, order[r]);
    }
    return out;
}

Matrix sample_covariance(const Matrix& x, std::span<const double> mean) {
    const std::size_t m = x.rows();
    const std::size_t d = x.cols();
    Matrix cov(d, d);
    std::vector<double> centred(d);
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) centred[j] = row[j] - mean[j];
        for (std::size_t a = 0; a < d; ++a) {
            const double ca = centred[a];
            for (std::size_t b = a; b < d; ++b) cov(a, b) += ca * centred[b];
        }
    }
    const double denom = static_cast<double>(m - 1);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= denom;
            cov(b, a) = cov(a, b);
        }
    }
    return cov;
}

PcaModel fit_pca(const Matrix& x, double variance_target) {
    if (!(variance_target > 0.0 && variance_target <= 1.0)) {
        throw Error(Errc::InvalidArgument, "variance_target must be in (0, 1]");
    }
    const std::size_t m = x.rows();
    const std::size_t d = x.cols();
    if (m < 2) throw Error(Errc::TooFewSamples, "PCA needs at least 2 samples, got " + std::to_string(m));
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "PCA input contains non-finite values");
    }

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
    }
    for (double& v : model.mean) v /= static_cast<double>(m);

    const Matrix cov = sample_covariance(x, model.mean);
    double trace = 0.0;
    for (std::size_t j = 0; j < d; ++j) trace += cov(j, j);
    model.total_variance = trace;

    SymmetricEigen eig = symmetric_eigen(cov);
    for (double& ev : eig.values) ev = std::max(ev, 0.0);

    std::size_t k = d;
    if (trace > 0.0) {
        double cumulative = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            cumulative += eig.values[j];
            if (cumulative >= variance_target * trace * (1.0 - 1e-12)) {
                k = j + 1;
                break;
            }
        }
    } else {
        k = 1;
    }

    model.components = Matrix(k, d);
    model.eigenvalues.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t r = 0; r < k; ++r) {
        const auto axis = eig.vectors.row(r);
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < d; ++j) {
            if (std::abs(axis[j]) > std::abs(axis[argmax])) argmax = j;
        }
        const double sign = axis[argmax] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) model.components(r, j) = sign * axis[j];
    }
    return model;
}

std::vector<double> pca_transform(const PcaModel& model, std::span<const double> x) {
    if (x.size() != model.dim()) {
        throw Error(Errc::DimensionMismatch, "PCA expects " + std::to_string(model.dim()) +
                                                 " values, got " + std::to_string(x.size()));
    }
    std::vector<double> z(model.k(), 0.0);
    for (std::size_t r = 0; r < model.k(); ++r) {
        const auto axis = model.components.row(r);
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) acc += axis[j] * (x[j] - model.mean[j]);
        z[r] = acc;
    }
    return z;
}

Matrix pca_transform_rows(const PcaModel& model, const Matrix& x) {
    Matrix out(x.rows(), model.k());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto z = pca_transform(model, x.row(i));
        std::copy(z.begin(), z.end(), out.row(i).begin());
    }
    return out;
}

std::vector<double> pca_inverse(const PcaModel& model, std::span<const double> z) {
    if (z.size() != model.k()) {
        throw Error(Errc::DimensionMismatch, "PCA inverse expects " + std::to_string(model.k()) +
                                                 " coordinates");
    }
    std::vector<double> x = model.mean;
    for (std::size_t r = 0; r < model.k(); ++r) {
        const auto axis = model.components.row(r);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += z[r] * axis[j];
    }
    return x;
}

void save_pca(const PcaModel& model, std::ostream& out) {
    out << "calfsense-pca 1\n";
    out << "dim " << model.dim() << "\nk " << model.k() << '\n';
    out << "total_variance " << textio::fmt17(model.total_variance) << '\n';
    textio::write_values(out, "mean", model.mean);
    textio::write_values(out, "eigenvalues", model.eigenvalues);
    for (std::size_t r = 0; r < model.k(); ++r) {
        textio::write_values(out, "component", model.components.row(r));
    }
}

PcaModel load_pca(std::istream& in) {
    textio::LineReader reader(in);
    reader.expect_header("calfsense-pca", 1);
    PcaModel model;
    const auto dim = reader.read_count("dim");
    const auto k = reader.read_count("k");
    model.total_variance = reader.read_scalar("total_variance");
    model.mean = reader.read_values("mean", dim);
    model.eigenvalues = reader.read_values("eigenvalues", k);
    model.components = Matrix(k, dim);
    for (std::size_t r = 0; r < k; ++r) {
        const auto row = reader.read_values("component", dim);
        std::copy(row.begin(), row.end(), model.components.row(r).begin());
    }
    return model;
}

}  // namespace calfsense
