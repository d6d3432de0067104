#include <cmath>
#include <random>
#include <sstream>

#include "calfsense/error.hpp"
#include "calfsense/evaluation.hpp"
#include "calfsense/multiclass.hpp"
#include "calfsense/svm.hpp"
#include "doctest.h"

using namespace calfsense;

namespace {

struct Blobs {
    Matrix x;
    std::vector<MotionLabel> labels;
};

Blobs blobs(std::size_t per_class, std::size_t classes, double spread, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, spread);
    Blobs b;
    b.x = Matrix(per_class * classes, 3);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t r = c * per_class + i;
            b.x(r, 0) = 4.0 * std::cos(double(c)) + g(rng);
            b.x(r, 1) = 4.0 * std::sin(double(c)) + g(rng);
            b.x(r, 2) = g(rng);
            b.labels.push_back(kMotions[c]);
        }
    }
    return b;
}

}  // namespace

TEST_CASE("kernel examples") {
    const std::vector<double> u = {1, 2}, v = {3, 4};
    CHECK(kernel_eval(KernelSpec::linear(), u, v) == 11.0);
    CHECK(kernel_eval(KernelSpec::rbf(0.7), u, u) == 1.0);
    const std::vector<double> a = {0, 0}, b = {1, 1};
    CHECK(kernel_eval(KernelSpec::rbf(0.5), a, b) == doctest::Approx(std::exp(-1.0)));
    CHECK_THROWS_AS(kernel_eval(KernelSpec::linear(), u, std::vector<double>{1}), Error);
    CHECK_THROWS_AS(KernelSpec::rbf(0.0).validate(), Error);
}

TEST_CASE("two-point analytic solution") {
    const Matrix x(2, 1, {-1.0, 1.0});
    const std::vector<int> y = {-1, 1};
    TrainConfig cfg;
    cfg.c = 100.0;
    const auto fit = train_binary_fit(x, y, KernelSpec::linear(), cfg);
    CHECK(fit.model.alphas.size() == 2);
    CHECK(fit.alphas[0] == doctest::Approx(0.5));
    CHECK(fit.alphas[1] == doctest::Approx(0.5));
    CHECK(fit.model.bias == doctest::Approx(0.0));
    CHECK(fit.model.decision(std::vector<double>{1.0}) == doctest::Approx(1.0));
    CHECK(fit.model.decision(std::vector<double>{-1.0}) == doctest::Approx(-1.0));
}

TEST_CASE("xor with rbf") {
    const Matrix x(4, 2, {0, 0, 1, 1, 0, 1, 1, 0});
    const std::vector<int> y = {-1, -1, 1, 1};
    TrainConfig cfg;
    cfg.c = 100.0;
    const auto m = train_binary(x, y, KernelSpec::rbf(1.0), cfg);
    for (std::size_t i = 0; i < 4; ++i) CHECK(m.predict(x.row(i)) == y[i]);
}

TEST_CASE("kkt and box constraints on noisy data") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix x(120, 3);
    std::vector<int> y(120);
    for (std::size_t i = 0; i < 120; ++i) {
        y[i] = i % 3 ? 1 : -1;
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = g(rng) + (j == 1 ? 0.7 * y[i] : 0.0);
    }
    for (const auto k : {KernelSpec::linear(), KernelSpec::rbf(0.5)}) {
        for (const double c : {0.1, 1.0, 20.0}) {
            TrainConfig cfg;
            cfg.c = c;
            const auto fit = train_binary_fit(x, y, k, cfg);
            CHECK(kkt_residual(x, y, fit.alphas, fit.model) <= cfg.tol);
            double eq = 0.0;
            for (std::size_t i = 0; i < 120; ++i) {
                CHECK(fit.alphas[i] >= 0.0);
                CHECK(fit.alphas[i] <= c);
                eq += fit.alphas[i] * y[i];
            }
            CHECK(std::abs(eq) <= 1e-9 * c * 120);
        }
    }
}

TEST_CASE("duplicated points leave the decision function unchanged") {
    std::mt19937_64 rng(22);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix x(40, 2), xx(80, 2);
    std::vector<int> y(40), yy(80);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = i % 2 ? 1 : -1;
        x(i, 0) = g(rng) + 2.0 * y[i];
        x(i, 1) = g(rng);
        for (std::size_t k : {i, i + 40}) {
            xx(k, 0) = x(i, 0);
            xx(k, 1) = x(i, 1);
            yy[k] = y[i];
        }
    }
    TrainConfig a, b;
    a.c = 1.0;
    a.tol = 1e-6;
    b.c = 0.5;  // each copy carries half the weight
    b.tol = 1e-6;
    const auto m1 = train_binary(x, y, KernelSpec::rbf(0.5), a);
    const auto m2 = train_binary(xx, yy, KernelSpec::rbf(0.5), b);
    for (double p = -4.0; p <= 4.0; p += 0.5) {
        for (double q = -2.0; q <= 2.0; q += 1.0) {
            const std::vector<double> probe = {p, q};
            CHECK(m2.decision(probe) == doctest::Approx(m1.decision(probe)).epsilon(1e-4).scale(1.0));
        }
    }
}

TEST_CASE("seeded training is deterministic") {
    const auto b = blobs(30, 2, 2.0, 23);
    std::vector<int> y;
    for (auto l : b.labels) y.push_back(l == MotionLabel::A1 ? 1 : -1);
    TrainConfig cfg;
    cfg.seed = 5;
    const auto f1 = train_binary_fit(b.x, y, KernelSpec::rbf(0.5), cfg);
    const auto f2 = train_binary_fit(b.x, y, KernelSpec::rbf(0.5), cfg);
    CHECK(f1.alphas == f2.alphas);
    CHECK(f1.model.bias == f2.model.bias);
}

TEST_CASE("binary trainer errors") {
    const Matrix x(3, 1, {0, 1, 2});
    CHECK_THROWS_AS(train_binary(x, std::vector<int>{1, 1, 1}, KernelSpec::linear(), {}), Error);
    CHECK_THROWS_AS(train_binary(x, std::vector<int>{1, -1}, KernelSpec::linear(), {}), Error);
    Matrix bad(2, 1, {0, INFINITY});
    CHECK_THROWS_AS(train_binary(bad, std::vector<int>{1, -1}, KernelSpec::linear(), {}), Error);
}

TEST_CASE("three separated clusters are learned perfectly") {
    const auto b = blobs(40, 3, 0.5, 24);
    MultiClassConfig cfg;
    const auto m = train_multiclass(b.x, b.labels, cfg);
    CHECK(m.pairs.size() == 3);
    ConfusionMatrix cm(m.classes);
    const auto pred = m.predict_batch(b.x);
    for (std::size_t i = 0; i < pred.size(); ++i) cm.add(b.labels[i], pred[i]);
    CHECK(compute_metrics(cm).macro_recall == 1.0);
}

TEST_CASE("two classes give one pair identical to the binary trainer") {
    const auto b = blobs(30, 2, 1.0, 25);
    MultiClassConfig cfg;
    cfg.standardize = false;
    cfg.use_pca = false;
    cfg.kernel = KernelSpec::rbf(0.3);
    cfg.train.seed = 9;
    const auto m = train_multiclass(b.x, b.labels, cfg);
    REQUIRE(m.pairs.size() == 1);
    std::vector<int> y;
    for (auto l : b.labels) y.push_back(l == MotionLabel::A1 ? 1 : -1);
    TrainConfig t = cfg.train;
    t.seed = pair_seed(cfg.train.seed, 0);
    const auto direct = train_binary(b.x, y, cfg.kernel, t);
    CHECK(m.pairs[0].model.alphas == direct.alphas);
    CHECK(m.pairs[0].model.bias == direct.bias);
}

TEST_CASE("sample order does not change predictions") {
    const auto b = blobs(25, 4, 1.2, 26);
    std::vector<std::size_t> perm(b.labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
    Matrix px(b.x.rows(), b.x.cols());
    std::vector<MotionLabel> pl;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        for (std::size_t j = 0; j < b.x.cols(); ++j) px(i, j) = b.x(perm[i], j);
        pl.push_back(b.labels[perm[i]]);
    }
    MultiClassConfig cfg;
    cfg.train.tol = 1e-6;
    const auto m1 = train_multiclass(b.x, b.labels, cfg);
    const auto m2 = train_multiclass(px, pl, cfg);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 200; ++t) {
        const std::vector<double> probe = {u(rng), u(rng), 0.5 * u(rng)};
        CHECK(m1.predict(probe) == m2.predict(probe));
    }
}

TEST_CASE("parallel and serial pair training agree") {
    const auto b = blobs(30, 5, 1.5, 27);
    MultiClassConfig cfg;
    cfg.parallel = false;
    const auto s = train_multiclass(b.x, b.labels, cfg);
    cfg.parallel = true;
    const auto p = train_multiclass(b.x, b.labels, cfg);
    for (std::size_t k = 0; k < s.pairs.size(); ++k) CHECK(s.pairs[k].model.alphas == p.pairs[k].model.alphas);
    CHECK(s.predict_batch(b.x, false) == p.predict_batch(b.x, true));
}

TEST_CASE("model save and load") {
    const auto b = blobs(20, 3, 1.0, 28);
    const auto m = train_multiclass(b.x, b.labels, MultiClassConfig{});
    std::stringstream io;
    save_model(m, io);
    const auto r = load_model(io);
    CHECK(r.classes == m.classes);
    CHECK(r.pairs.size() == m.pairs.size());
    for (std::size_t i = 0; i < b.x.rows(); ++i) CHECK(r.predict(b.x.row(i)) == m.predict(b.x.row(i)));
    std::istringstream junk("calfsense-model 7\n");
    CHECK_THROWS_AS(load_model(junk), Error);
}

TEST_CASE("multiclass errors") {
    const auto b = blobs(10, 1, 1.0, 29);
    try {
        train_multiclass(b.x, b.labels, MultiClassConfig{});
        FAIL("expected SingleClassInput");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SingleClassInput);
    }
    Matrix x(3, 1, {0, 1, 2});
    const std::vector<MotionLabel> l = {MotionLabel::A1, MotionLabel::A1, MotionLabel::A2};
    try {
        train_multiclass(x, l, MultiClassConfig{});
        FAIL("expected ClassTooSmall");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ClassTooSmall);
        CHECK(std::string(e.what()).find("A2") != std::string::npos);
    }
}
