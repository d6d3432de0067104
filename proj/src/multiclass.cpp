#include "calfsense/multiclass.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "calfsense/error.hpp"
#include "calfsense/seed.hpp"
#include "calfsense/textio.hpp"

namespace calfsense {

Standardizer Standardizer::fit(const Matrix& x) {
    Standardizer s;
    const std::size_t m = x.rows();
    const std::size_t d = x.cols();
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    if (m == 0) return s;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
    }
    for (double& v : s.mean) v /= static_cast<double>(m);
    if (m < 2) return s;
    for (std::size_t j = 0; j < d; ++j) {
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double dv = x(i, j) - s.mean[j];
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss / static_cast<double>(m - 1));
        s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    if (x.size() != mean.size()) {
        throw Error(Errc::DimensionMismatch, "standardizer expects " + std::to_string(mean.size()) +
                                                 " values, got " + std::to_string(x.size()));
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
    return out;
}

Matrix Standardizer::apply_rows(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto z = apply(x.row(i));
        std::copy(z.begin(), z.end(), out.row(i).begin());
    }
    return out;
}

std::vector<double> MultiClassModel::preprocess(std::span<const double> features) const {
    std::vector<double> z(features.begin(), features.end());
    if (standardizer) z = standardizer->apply(z);
    if (pca) z = pca_transform(*pca, z);
    return z;
}

MotionLabel MultiClassModel::predict(std::span<const double> features) const {
    const auto z = preprocess(features);
    std::vector<int> votes(classes.size(), 0);
    std::vector<double> strength(classes.size(), 0.0);
    for (const auto& pair : pairs) {
        const double f = pair.model.decision(z);
        const std::size_t winner = f >= 0.0 ? pair.positive : pair.negative;
        ++votes[winner];
        strength[winner] += std::abs(f);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < classes.size(); ++k) {
        if (votes[k] > votes[best] || (votes[k] == votes[best] && strength[k] > strength[best])) {
            best = k;
        }
    }
    return classes[best];
}

std::vector<MotionLabel> MultiClassModel::predict_batch(const Matrix& features, bool parallel) const {
    std::vector<MotionLabel> out(features.rows());
    const auto n = static_cast<std::ptrdiff_t>(features.rows());
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = predict(features.row(static_cast<std::size_t>(i)));
    }
    return out;
}

std::uint64_t pair_seed(std::uint64_t root, std::size_t pair_index) noexcept {
    return derive_seed(root, pair_index);
}

MultiClassModel train_multiclass(const Matrix& features, std::span<const MotionLabel> labels,
                                 const MultiClassConfig& cfg) {
    if (features.rows() != labels.size()) {
        throw Error(Errc::DimensionMismatch, "have " + std::to_string(features.rows()) +
                                                 " samples and " + std::to_string(labels.size()) +
                                                 " labels");
    }
    cfg.train.validate();

    std::map<MotionLabel, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    if (by_class.size() < 2) {
        throw Error(Errc::SingleClassInput,
                    by_class.empty() ? std::string("no training samples")
                                     : "only class " + std::string(to_string(by_class.begin()->first)) +
                                           " present");
    }
    for (const auto& [label, rows] : by_class) {
        if (rows.size() < 2) {
            throw Error(Errc::ClassTooSmall, "class " + std::string(to_string(label)) + " has " +
                                                 std::to_string(rows.size()) + " sample(s)");
        }
    }

    MultiClassModel model;
    model.train = cfg.train;
    for (const auto& entry : by_class) model.classes.push_back(entry.first);

    Matrix z = features;
    if (cfg.standardize) {
        model.standardizer = Standardizer::fit(z);
        z = model.standardizer->apply_rows(z);
    }
    if (cfg.use_pca) {
        model.pca = fit_pca(z, cfg.pca_variance);
        z = pca_transform_rows(*model.pca, z);
    }

    model.kernel = cfg.kernel;
    if (model.kernel.kind == KernelKind::Rbf && model.kernel.gamma == 0.0) {
        const Standardizer stats = Standardizer::fit(z);
        double mean_var = 0.0;
        for (double s : stats.scale) mean_var += s * s;
        mean_var /= static_cast<double>(stats.scale.size());
        if (!(mean_var > 0.0)) mean_var = 1.0;
        model.kernel.gamma = 1.0 / (static_cast<double>(z.cols()) * mean_var);
    }
    model.kernel.validate();

    const std::size_t k = model.classes.size();
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) model.pairs.push_back({a, b, {}});
    }

    const auto n_pairs = static_cast<std::ptrdiff_t>(model.pairs.size());
    std::vector<std::string> failures(model.pairs.size());
#pragma omp parallel for schedule(dynamic, 1) if (cfg.parallel)
    for (std::ptrdiff_t p = 0; p < n_pairs; ++p) {
        auto& pair = model.pairs[static_cast<std::size_t>(p)];
        const auto& pos_rows = by_class.at(model.classes[pair.positive]);
        const auto& neg_rows = by_class.at(model.classes[pair.negative]);
        // Training order follows the original row order, independent of class grouping.
        std::vector<std::size_t> rows;
        rows.reserve(pos_rows.size() + neg_rows.size());
        std::merge(pos_rows.begin(), pos_rows.end(), neg_rows.begin(), neg_rows.end(),
                   std::back_inserter(rows));
        Matrix x(rows.size(), z.cols());
        std::vector<int> y(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto src = z.row(rows[r]);
            std::copy(src.begin(), src.end(), x.row(r).begin());
            y[r] = labels[rows[r]] == model.classes[pair.positive] ? 1 : -1;
        }
        TrainConfig tc = cfg.train;
        tc.seed = pair_seed(cfg.train.seed, static_cast<std::size_t>(p));
        try {
            pair.model = train_binary(x, y, model.kernel, tc);
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(p)] = e.what();
        }
    }
    for (const auto& f : failures) {
        if (!f.empty()) throw Error(Errc::InvalidArgument, "pairwise training failed: " + f);
    }
    return model;
}

namespace {

std::string_view kernel_name(KernelKind k) { return k == KernelKind::Linear ? "linear" : "rbf"; }

}  // namespace

void save_model(const MultiClassModel& model, std::ostream& out) {
    out << "calfsense-model 1\n";
    out << "classes";
    for (auto c : model.classes) out << ' ' << to_string(c);
    out << '\n';
    out << "standardize " << (model.standardizer ? 1 : 0) << '\n';
    if (model.standardizer) {
        textio::write_values(out, "std_mean", model.standardizer->mean);
        textio::write_values(out, "std_scale", model.standardizer->scale);
    }
    out << "pca " << (model.pca ? 1 : 0) << '\n';
    if (model.pca) save_pca(*model.pca, out);
    out << "kernel " << kernel_name(model.kernel.kind) << '\n';
    out << "gamma " << textio::fmt17(model.kernel.gamma) << '\n';
    out << "c " << textio::fmt17(model.train.c) << '\n';
    out << "tol " << textio::fmt17(model.train.tol) << '\n';
    out << "max_passes " << model.train.max_passes << '\n';
    out << "seed " << model.train.seed << '\n';
    out << "pairs " << model.pairs.size() << '\n';
    for (const auto& p : model.pairs) {
        out << "pair " << p.positive << ' ' << p.negative << '\n';
        const auto& m = p.model;
        out << "dim " << m.support_vectors.cols() << '\n';
        out << "n_sv " << m.alphas.size() << '\n';
        out << "bias " << textio::fmt17(m.bias) << '\n';
        textio::write_values(out, "alphas", m.alphas);
        std::vector<double> labels(m.sv_labels.begin(), m.sv_labels.end());
        textio::write_values(out, "labels", labels);
        for (std::size_t s = 0; s < m.alphas.size(); ++s) {
            textio::write_values(out, "sv", m.support_vectors.row(s));
        }
    }
}

MultiClassModel load_model(std::istream& in) {
    textio::LineReader reader(in);
    reader.expect_header("calfsense-model", 1);
    MultiClassModel model;
    for (const auto& word : reader.read_words("classes")) {
        const auto label = try_parse_motion(word);
        if (!label) throw Error(Errc::BadModelFile, "unknown class '" + word + "'");
        model.classes.push_back(*label);
    }
    if (reader.read_count("standardize") == 1) {
        Standardizer s;
        s.mean = reader.read_vector("std_mean");
        s.scale = reader.read_values("std_scale", s.mean.size());
        model.standardizer = std::move(s);
    }
    if (reader.read_count("pca") == 1) model.pca = load_pca(in);
    const auto kind = reader.read_word("kernel");
    if (kind != "linear" && kind != "rbf") throw Error(Errc::BadModelFile, "unknown kernel " + kind);
    model.kernel.kind = kind == "linear" ? KernelKind::Linear : KernelKind::Rbf;
    model.kernel.gamma = reader.read_scalar("gamma");
    model.train.c = reader.read_scalar("c");
    model.train.tol = reader.read_scalar("tol");
    model.train.max_passes = static_cast<int>(reader.read_count("max_passes"));
    model.train.seed = std::stoull(reader.read_word("seed"));
    const auto n_pairs = reader.read_count("pairs");
    for (std::size_t p = 0; p < n_pairs; ++p) {
        const auto ids = reader.read_words("pair");
        if (ids.size() != 2) throw Error(Errc::BadModelFile, "pair line needs two indices");
        PairModel pm;
        pm.positive = std::stoul(ids[0]);
        pm.negative = std::stoul(ids[1]);
        if (pm.positive >= model.classes.size() || pm.negative >= model.classes.size()) {
            throw Error(Errc::BadModelFile, "pair index out of range");
        }
        const auto dim = reader.read_count("dim");
        const auto n_sv = reader.read_count("n_sv");
        pm.model.kernel = model.kernel;
        pm.model.c = model.train.c;
        pm.model.bias = reader.read_scalar("bias");
        pm.model.alphas = reader.read_values("alphas", n_sv);
        for (double l : reader.read_values("labels", n_sv)) pm.model.sv_labels.push_back(l > 0 ? 1 : -1);
        pm.model.support_vectors = Matrix(n_sv, dim);
        for (std::size_t s = 0; s < n_sv; ++s) {
            const auto row = reader.read_values("sv", dim);
            std::copy(row.begin(), row.end(), pm.model.support_vectors.row(s).begin());
        }
        model.pairs.push_back(std::move(pm));
    }
    return model;
}

}  // namespace calfsense
