#include "calfsense/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <random>
#include <string>

#include "calfsense/error.hpp"

namespace calfsense {

namespace {

double dot(std::span<const double> u, std::span<const double> v) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
    return acc;
}

double squared_distance(std::span<const double> u, std::span<const double> v) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        acc += d * d;
    }
    return acc;
}

double kernel_unchecked(const KernelSpec& k, std::span<const double> u,
                        std::span<const double> v) noexcept {
    if (k.kind == KernelKind::Linear) return dot(u, v);
    return std::exp(-k.gamma * squared_distance(u, v));
}

// Lazily computed Gram rows with LRU eviction under a byte budget.
class KernelCache {
public:
    KernelCache(const Matrix& x, const KernelSpec& kernel, std::size_t budget_bytes)
        : x_(x), kernel_(kernel), rows_(x.rows()), where_(x.rows()), diag_(x.rows()) {
        const std::size_t row_bytes = std::max<std::size_t>(1, x.rows() * sizeof(double));
        capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            diag_[i] = kernel_unchecked(kernel_, x_.row(i), x_.row(i));
        }
    }

    double diag(std::size_t i) const noexcept { return diag_[i]; }

    const std::vector<double>& row(std::size_t i) {
        if (!rows_[i].empty()) {
            lru_.splice(lru_.begin(), lru_, where_[i]);
            return rows_[i];
        }
        if (lru_.size() >= capacity_) {
            const std::size_t victim = lru_.back();
            lru_.pop_back();
            rows_[victim].clear();
            rows_[victim].shrink_to_fit();
        }
        auto& r = rows_[i];
        r.resize(x_.rows());
        const auto xi = x_.row(i);
        for (std::size_t k = 0; k < x_.rows(); ++k) r[k] = kernel_unchecked(kernel_, xi, x_.row(k));
        lru_.push_front(i);
        where_[i] = lru_.begin();
        return r;
    }

private:
    const Matrix& x_;
    KernelSpec kernel_;
    std::vector<std::vector<double>> rows_;
    std::list<std::size_t> lru_;
    std::vector<std::list<std::size_t>::iterator> where_;
    std::vector<double> diag_;
    std::size_t capacity_ = 2;
};

class SmoSolver {
public:
    SmoSolver(const Matrix& x, std::span<const int> y, const KernelSpec& kernel,
              const TrainConfig& cfg)
        : x_(x),
          y_(y),
          cfg_(cfg),
          cache_(x, kernel, cfg.cache_mb * 1024 * 1024),
          alpha_(x.rows(), 0.0),
          g_(x.rows(), 0.0) {}

    void run(TrainStats& stats) {
        simplified_phase(stats);
        finish_phase(stats);
    }

    std::vector<double>& alphas() noexcept { return alpha_; }

    // Bias at the centre of the interval allowed by the KKT conditions.
    double bias() const {
        const auto [up, low] = extremes();
        if (up.index == kNone && low.index == kNone) return 0.0;
        if (up.index == kNone) return -low.value;
        if (low.index == kNone) return -up.value;
        return -0.5 * (up.value + low.value);
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    struct Extreme {
        std::size_t index = kNone;
        double value = 0.0;
    };

    double c() const noexcept { return cfg_.c; }
    double f_nobias(std::size_t i) const noexcept { return g_[i] - y_[i]; }

    bool in_up(std::size_t i) const noexcept {
        return (y_[i] > 0 && alpha_[i] < c()) || (y_[i] < 0 && alpha_[i] > 0.0);
    }
    bool in_low(std::size_t i) const noexcept {
        return (y_[i] < 0 && alpha_[i] < c()) || (y_[i] > 0 && alpha_[i] > 0.0);
    }

    // up: argmin F over I_up, low: argmax F over I_low, with F = g - y.
    std::pair<Extreme, Extreme> extremes() const {
        Extreme up{kNone, std::numeric_limits<double>::infinity()};
        Extreme low{kNone, -std::numeric_limits<double>::infinity()};
        for (std::size_t i = 0; i < alpha_.size(); ++i) {
            const double f = f_nobias(i);
            if (in_up(i) && f < up.value) up = {i, f};
            if (in_low(i) && f > low.value) low = {i, f};
        }
        return {up, low};
    }

    // Applies new values for the pair and refreshes the decision cache.
    // Rounding residue near a bound would keep a point in the working set
    // while allowing it no room to move.
    double snap(double a) const noexcept {
        const double eps = 1e-12 * c();
        if (a < eps) return 0.0;
        if (a > c() - eps) return c();
        return a;
    }

    void commit(std::size_t i, std::size_t j, double ai, double aj) {
        ai = snap(ai);
        aj = snap(aj);
        const double di = (ai - alpha_[i]) * y_[i];
        const double dj = (aj - alpha_[j]) * y_[j];
        alpha_[i] = ai;
        alpha_[j] = aj;
        const auto& ki = cache_.row(i);
        const auto& kj = cache_.row(j);
        for (std::size_t k = 0; k < g_.size(); ++k) g_[k] += di * ki[k] + dj * kj[k];
    }

    struct PairStep {
        double ai;
        double aj;
        bool moved;
    };

    // Optimal step for the pair along the equality-constrained line, clipped to the box.
    PairStep pair_step(std::size_t i, std::size_t j, double ei, double ej, double curvature_floor) {
        const double ai_old = alpha_[i];
        const double aj_old = alpha_[j];
        double lo, hi;
        if (y_[i] != y_[j]) {
            lo = std::max(0.0, aj_old - ai_old);
            hi = std::min(c(), c() + aj_old - ai_old);
        } else {
            lo = std::max(0.0, ai_old + aj_old - c());
            hi = std::min(c(), ai_old + aj_old);
        }
        if (lo >= hi) return {ai_old, aj_old, false};

        const double kij = cache_.row(i)[j];
        double curvature = cache_.diag(i) + cache_.diag(j) - 2.0 * kij;
        if (curvature <= 0.0) {
            if (curvature_floor <= 0.0) return {ai_old, aj_old, false};
            curvature = curvature_floor;
        }
        double aj = aj_old + y_[j] * (ei - ej) / curvature;
        aj = std::clamp(aj, lo, hi);
        double ai = ai_old + y_[i] * y_[j] * (aj_old - aj);
        ai = std::clamp(ai, 0.0, c());
        return {ai, aj, aj != aj_old};
    }

    void simplified_phase(TrainStats& stats) {
        const std::size_t m = alpha_.size();
        std::mt19937_64 rng(cfg_.seed);
        const double min_step = 1e-5 * std::min(1.0, c());
        double b = 0.0;
        int quiet_passes = 0;

        while (quiet_passes < cfg_.max_passes && stats.sweeps < cfg_.max_sweeps) {
            ++stats.sweeps;
            std::size_t changed = 0;
            for (std::size_t i = 0; i < m; ++i) {
                const double ei = g_[i] + b - y_[i];
                const double r = y_[i] * ei;
                if (!((r < -cfg_.tol && alpha_[i] < c()) || (r > cfg_.tol && alpha_[i] > 0.0))) {
                    continue;
                }
                std::size_t j = static_cast<std::size_t>(rng() % (m - 1));
                if (j >= i) ++j;
                const double ej = g_[j] + b - y_[j];

                const double ai_old = alpha_[i];
                const double aj_old = alpha_[j];
                const auto step = pair_step(i, j, ei, ej, 0.0);
                if (!step.moved || std::abs(step.aj - aj_old) < min_step) continue;

                const double kii = cache_.diag(i);
                const double kjj = cache_.diag(j);
                const double kij = cache_.row(i)[j];
                const double dai = step.ai - ai_old;
                const double daj = step.aj - aj_old;
                const double b1 = b - ei - y_[i] * dai * kii - y_[j] * daj * kij;
                const double b2 = b - ej - y_[i] * dai * kij - y_[j] * daj * kjj;
                if (step.ai > 0.0 && step.ai < c()) {
                    b = b1;
                } else if (step.aj > 0.0 && step.aj < c()) {
                    b = b2;
                } else {
                    b = 0.5 * (b1 + b2);
                }
                commit(i, j, step.ai, step.aj);
                ++changed;
                ++stats.smo_updates;
            }
            quiet_passes = changed == 0 ? quiet_passes + 1 : 0;
        }
    }

    void finish_phase(TrainStats& stats) {
        const std::size_t limit = 1000 * alpha_.size() + 100000;
        for (std::size_t iter = 0; iter < limit; ++iter) {
            const auto [up, low] = extremes();
            if (up.index == kNone || low.index == kNone) {
                stats.final_gap = 0.0;
                return;
            }
            stats.final_gap = low.value - up.value;
            if (stats.final_gap <= cfg_.tol) return;
            const auto step = pair_step(up.index, low.index, up.value, low.value, 1e-12);
            if (!step.moved) return;
            commit(up.index, low.index, step.ai, step.aj);
            ++stats.finish_updates;
        }
    }

    const Matrix& x_;
    std::span<const int> y_;
    TrainConfig cfg_;
    KernelCache cache_;
    std::vector<double> alpha_;
    std::vector<double> g_;  // sum_j alpha_j y_j K(i, j)
};

}  // namespace

void KernelSpec::validate() const {
    if (kind == KernelKind::Rbf && !(std::isfinite(gamma) && gamma > 0.0)) {
        throw Error(Errc::InvalidArgument, "rbf gamma must be finite and positive");
    }
}

double kernel_eval(const KernelSpec& kernel, std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw Error(Errc::DimensionMismatch, "kernel operands have sizes " +
                                                 std::to_string(u.size()) + " and " +
                                                 std::to_string(v.size()));
    }
    return kernel_unchecked(kernel, u, v);
}

void TrainConfig::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(Errc::InvalidArgument, "c must be positive");
    if (!(tol > 0.0)) throw Error(Errc::InvalidArgument, "tol must be positive");
    if (max_passes < 1) throw Error(Errc::InvalidArgument, "max_passes must be >= 1");
    if (max_sweeps < 0) throw Error(Errc::InvalidArgument, "max_sweeps must be >= 0");
}

double BinaryModel::decision(std::span<const double> x) const {
    if (support_vectors.rows() > 0 && x.size() != support_vectors.cols()) {
        throw Error(Errc::DimensionMismatch, "model expects " +
                                                 std::to_string(support_vectors.cols()) +
                                                 " features, got " + std::to_string(x.size()));
    }
    double f = bias;
    for (std::size_t s = 0; s < alphas.size(); ++s) {
        f += alphas[s] * sv_labels[s] * kernel_unchecked(kernel, support_vectors.row(s), x);
    }
    return f;
}

BinaryFit train_binary_fit(const Matrix& x, std::span<const int> y, const KernelSpec& kernel,
                           const TrainConfig& cfg) {
    kernel.validate();
    cfg.validate();
    if (x.rows() != y.size()) {
        throw Error(Errc::DimensionMismatch, "have " + std::to_string(x.rows()) + " rows and " +
                                                 std::to_string(y.size()) + " labels");
    }
    if (x.rows() < 2) throw Error(Errc::SingleClassInput, "need at least 2 training points");
    bool pos = false, neg = false;
    for (int label : y) {
        if (label == 1) {
            pos = true;
        } else if (label == -1) {
            neg = true;
        } else {
            throw Error(Errc::InvalidArgument, "binary labels must be +1 or -1");
        }
    }
    if (!pos || !neg) throw Error(Errc::SingleClassInput, "training data holds a single class");
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "training data has non-finite values");
    }

    SmoSolver solver(x, y, kernel, cfg);
    BinaryFit fit;
    solver.run(fit.stats);
    fit.alphas = solver.alphas();

    auto& model = fit.model;
    model.kernel = kernel;
    model.c = cfg.c;
    model.bias = solver.bias();
    for (std::size_t i = 0; i < fit.alphas.size(); ++i) {
        if (fit.alphas[i] > 0.0) {
            model.support_vectors.append_row(x.row(i));
            model.alphas.push_back(fit.alphas[i]);
            model.sv_labels.push_back(y[i]);
            model.sv_indices.push_back(i);
        }
    }
    return fit;
}

BinaryModel train_binary(const Matrix& x, std::span<const int> y, const KernelSpec& kernel,
                         const TrainConfig& cfg) {
    return train_binary_fit(x, y, kernel, cfg).model;
}

double kkt_residual(const Matrix& x, std::span<const int> y, std::span<const double> alphas,
                    const BinaryModel& model) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double margin = y[i] * model.decision(x.row(i));
        double r;
        if (alphas[i] <= 0.0) {
            r = std::max(0.0, 1.0 - margin);
        } else if (alphas[i] >= model.c) {
            r = std::max(0.0, margin - 1.0);
        } else {
            r = std::abs(margin - 1.0);
        }
        worst = std::max(worst, r);
    }
    return worst;
}

}  // namespace calfsense
