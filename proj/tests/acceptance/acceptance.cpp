// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "calfsense/config.hpp"
#include "calfsense/error.hpp"
#include "calfsense/features.hpp"
#include "calfsense/health.hpp"
#include "calfsense/ingest.hpp"
#include "calfsense/pca.hpp"
#include "calfsense/pipeline.hpp"
#include "calfsense/simulator.hpp"
#include "calfsense/svm.hpp"
#include "calfsense/wire.hpp"

using namespace calfsense;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

std::string format(const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

double rel_err(double got, double want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

NormalizedSeries normalize_default(const Session& s) { return normalize(s, estimate_baseline(s.frames)); }

// Direct-formula statistics in long double, written without the library.
struct OracleStats {
    long double mean, rms, std, energy;
};

OracleStats oracle(const std::vector<double>& x) {
    const long double n = static_cast<long double>(x.size());
    long double sum = 0, sq = 0;
    for (double v : x) {
        sum += v;
        sq += static_cast<long double>(v) * v;
    }
    const long double mean = sum / n;
    long double dev = 0;
    for (double v : x) dev += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / n), std::sqrt(dev / n), sq / n};
}

Outcome c1_feature_oracle() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> len(2, 360);
    std::uniform_real_distribution<double> val(-0.5, 2.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = len(rng);
        std::vector<double> data(n * kChannels);
        for (auto& v : data) v = val(rng);
        const Window w{data, n, 0, MotionLabel::A1, {}};
        const FeatureVector fv = featurize(w);
        for (std::size_t ch = 0; ch < kChannels; ++ch) {
            std::vector<double> col(n);
            for (std::size_t r = 0; r < n; ++r) col[r] = data[r * kChannels + ch];
            const OracleStats o = oracle(col);
            worst = std::max({worst, rel_err(fv.values[feature_index(ch, Feature::Mean)], double(o.mean)),
                              rel_err(fv.values[feature_index(ch, Feature::Rms)], double(o.rms)),
                              rel_err(fv.values[feature_index(ch, Feature::Std)], double(o.std)),
                              rel_err(fv.values[feature_index(ch, Feature::Energy)], double(o.energy))});
        }
    }
    return {worst <= 1e-9, format("worst relative error %.2e over 1000 windows", worst)};
}

// Differences are taken relative to the energy, the largest of the terms.
Outcome c2_identities() {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<std::size_t> len(1, 400);
    std::uniform_real_distribution<double> offset(-3.0, 3.0), spread(0.0, 2.0), unit(-1.0, 1.0);
    double worst_rms = 0.0, worst_var = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const std::size_t n = len(rng);
        const double c = offset(rng), s = spread(rng);
        std::vector<double> x(n);
        for (auto& v : x) v = c + s * unit(rng);
        const double m = feat_mean(x), r = feat_rms(x), sd = feat_std(x), e = feat_energy(x);
        if (e == 0.0) continue;
        worst_rms = std::max(worst_rms, std::abs(e - r * r) / e);
        worst_var = std::max(worst_var, std::abs(sd * sd - (e - m * m)) / e);
    }
    const bool ok = worst_rms <= 1e-12 && worst_var <= 1e-12;
    return {ok, format("E=RMS^2 worst %.2e, var=E-mean^2 worst %.2e", worst_rms, worst_var)};
}

Outcome c3_windowing() {
    std::size_t mismatches = 0, cases = 0;
    for (const double ov : {0.0, 0.25, 0.3, 0.5, 0.6}) {
        for (const double len_s : {1.0, 2.0, 4.0, 6.0}) {
            const WindowSpec spec = ov == 0.0 ? WindowSpec::fixed(len_s) : WindowSpec::sliding(len_s, ov);
            const std::size_t w = window_samples(spec, 60.0);
            const std::size_t s = window_stride(spec, 60.0);
            for (std::size_t L = 0; L <= 2000; ++L) {
                std::size_t brute = 0;
                for (std::size_t start = 0; start + w <= L; start += s) ++brute;
                ++cases;
                if (window_count(L, w, s) != brute) ++mismatches;
            }
        }
    }
    NormalizedSeries series;
    series.x = Matrix(5400, kChannels);
    for (std::size_t i = 0; i < 5400; ++i) series.timestamps_us.push_back(static_cast<std::int64_t>(i) * 1000000 / 60);
    const auto windows = segment(series, WindowSpec::sliding(2.0, 0.5));
    bool starts_ok = true;
    for (std::size_t i = 0; i < windows.size(); ++i) starts_ok = starts_ok && windows[i].start_index == i * 60;
    const bool ok = mismatches == 0 && windows.size() == 89 && starts_ok;
    return {ok, format("%zu grid cases, %zu mismatches; L=5400 w=120 50%% -> %zu windows", cases, mismatches,
                       windows.size())};
}

Outcome c4_pca() {
    const std::size_t m = 500, d = 16;
    std::mt19937_64 rng(404);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix mix(d, d);
    for (auto& v : mix.data()) v = g(rng);
    Matrix x(m, d);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> z(d);
        for (std::size_t j = 0; j < d; ++j) z[j] = g(rng) * (1.0 + 0.5 * static_cast<double>(d - j));
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 3.0 * static_cast<double>(c);
            for (std::size_t j = 0; j < d; ++j) acc += z[j] * mix(j, c);
            x(i, c) = acc;
        }
    }
    const PcaModel model = fit_pca(x, 1.0);
    double ortho = 0.0;
    for (std::size_t a = 0; a < model.k(); ++a) {
        for (std::size_t b = 0; b < model.k(); ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) dot += model.components(a, j) * model.components(b, j);
            ortho = std::max(ortho, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    }
    double recon = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto back = pca_inverse(model, pca_transform(model, x.row(i)));
        for (std::size_t j = 0; j < d; ++j) recon = std::max(recon, std::abs(back[j] - x(i, j)));
    }
    const Matrix z = pca_transform_rows(model, x);
    double var_err = 0.0;
    for (std::size_t a = 0; a < model.k(); ++a) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i) mean += z(i, a);
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) var += (z(i, a) - mean) * (z(i, a) - mean);
        var /= static_cast<double>(m - 1);
        var_err = std::max(var_err, rel_err(var, model.eigenvalues[a]));
    }
    const bool ok = model.k() == d && ortho <= 1e-8 && recon <= 1e-8 && var_err <= 1e-6;
    return {ok, format("k=%zu orthonormality %.1e, reconstruction %.1e, variance rel %.1e", model.k(), ortho, recon,
                       var_err)};
}

Outcome c5_svm() {
    std::vector<std::string> failures;
    TrainConfig cfg;
    cfg.c = 1000.0;

    const Matrix two(2, 1, {-1.0, 1.0});
    const std::vector<int> y2 = {-1, 1};
    const BinaryFit f2 = train_binary_fit(two, y2, KernelSpec::linear(), cfg);
    const double zero_at = f2.model.decision(std::vector<double>{0.0});
    const double slope = f2.model.decision(std::vector<double>{1.0}) - zero_at;
    const double boundary = -zero_at / slope;
    if (f2.model.alphas.size() != 2 || std::abs(boundary) > 1e-6 || std::abs(zero_at) > 1e-6) {
        failures.push_back(format("2-point boundary %.3g, %zu SVs", boundary, f2.model.alphas.size()));
    }

    const Matrix xor4(4, 2, {0, 0, 1, 1, 0, 1, 1, 0});
    const std::vector<int> yx = {-1, -1, 1, 1};
    const BinaryFit fx = train_binary_fit(xor4, yx, KernelSpec::rbf(1.0), cfg);
    int correct = 0;
    for (std::size_t i = 0; i < 4; ++i) correct += fx.model.predict(xor4.row(i)) == yx[i];
    if (correct != 4) failures.push_back(format("XOR accuracy %d/4", correct));

    std::mt19937_64 rng(505);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst_kkt = 0.0;
    std::vector<BinaryFit> fits = {f2, fx};
    std::vector<std::pair<Matrix, std::vector<int>>> sets = {{two, y2}, {xor4, yx}};
    for (int t = 0; t < 6; ++t) {
        Matrix x(150, 4);
        std::vector<int> y(150);
        for (std::size_t i = 0; i < 150; ++i) {
            y[i] = i % 2 ? 1 : -1;
            for (std::size_t j = 0; j < 4; ++j) x(i, j) = g(rng) + (j == 0 ? 0.8 * y[i] : 0.0);
        }
        TrainConfig c;
        c.c = t % 2 ? 10.0 : 0.5;
        c.seed = static_cast<std::uint64_t>(t);
        const KernelSpec k = t < 3 ? KernelSpec::linear() : KernelSpec::rbf(0.3);
        fits.push_back(train_binary_fit(x, y, k, c));
        sets.emplace_back(x, y);
    }
    for (std::size_t i = 0; i < fits.size(); ++i) {
        worst_kkt = std::max(worst_kkt, kkt_residual(sets[i].first, sets[i].second, fits[i].alphas, fits[i].model));
    }
    if (worst_kkt > cfg.tol) failures.push_back(format("KKT residual %.2e", worst_kkt));

    const auto& [xd, yd] = sets.back();
    TrainConfig cd;
    cd.seed = 99;
    const BinaryFit a = train_binary_fit(xd, yd, KernelSpec::rbf(0.3), cd);
    const BinaryFit b = train_binary_fit(xd, yd, KernelSpec::rbf(0.3), cd);
    if (a.alphas != b.alphas || a.model.bias != b.model.bias) failures.push_back("seeded runs differ");

    std::string detail = format("2-point boundary %.1e with %zu SVs, XOR %d/4, worst KKT %.1e over %zu models",
                                boundary, f2.model.alphas.size(), correct, worst_kkt, fits.size());
    for (const auto& f : failures) detail += "; " + f;
    return {failures.empty(), detail};
}

Outcome c6_end_to_end() {
    RunConfig rc;
    rc.resolve();
    std::vector<Session> sessions;
    for (int s = 1; s <= rc.sim.subjects; ++s) {
        for (auto m : kMotions) {
            for (int k = 1; k <= rc.sim.sets_per_motion; ++k) sessions.push_back(sim::synth_session(m, s, k, rc.sim).session);
        }
    }
    const auto features = extract_features(sessions, rc.pipeline);
    const PipelineResult r = train_and_evaluate(features, rc.pipeline);
    const double recall = r.evaluation.metrics.macro_recall;
    return {recall >= 0.95, format("%zu sessions, %zu windows, macro recall %.4f", sessions.size(), features.size(),
                                   recall)};
}

Outcome c7_gait() {
    sim::SimConfig sc;
    sim::HealthParams hp;
    const EventParams ep;
    const double truth_cadence = 60.0 / hp.gait.cycle_s;
    double worst_stance = 0.0, worst_swing = 0.0, worst_cadence = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        sc.seed = seed;
        const auto g = sim::synth_health(sim::Scenario::Gait, hp, sc);
        const GaitReport r = gait_analyze(normalize_default(g.session), ep);
        worst_stance = std::max(worst_stance, std::abs(r.stance_pct - 100.0 * hp.gait.duty));
        worst_swing = std::max(worst_swing, std::abs(r.swing_pct - 100.0 * (1.0 - hp.gait.duty)));
        worst_cadence = std::max(worst_cadence, std::abs(r.cadence_spm - truth_cadence) / truth_cadence);
    }
    const bool ok = worst_stance <= 3.0 && worst_swing <= 3.0 && worst_cadence <= 0.02;
    return {ok, format("10 seeds: stance off by <= %.2f pts, swing <= %.2f pts, cadence <= %.2f%%", worst_stance,
                       worst_swing, 100.0 * worst_cadence)};
}

Outcome c8_chair() {
    sim::SimConfig sc;
    sim::HealthParams hp;
    const EventParams ep;
    int wrong = 0, runs = 0;
    std::string first;
    for (int n = 5; n <= 20; ++n) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            sc.seed = seed;
            hp.chair.repetitions = n;
            const auto c = sim::synth_health(sim::Scenario::ChairStand, hp, sc);
            const auto r = chair_stand_count(normalize_default(c.session), ep, hp.chair.test_s, sc.preamble_s);
            ++runs;
            if (static_cast<int>(r.count) != n) {
                if (first.empty()) first = format(" (first: N=%d seed %d counted %zu)", n, int(seed), r.count);
                ++wrong;
            }
        }
    }
    return {wrong == 0, format("%d runs, %d miscounted", runs, wrong) + first};
}

Outcome c9_tandem() {
    sim::SimConfig sc;
    sim::HealthParams hp;
    const EventParams ep;
    double worst_shake = 0.0, worst_loss = 0.0;
    int missing = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        sc.seed = seed;
        const auto t = sim::synth_health(sim::Scenario::Tandem, hp, sc);
        const auto r = tandem_analyze(normalize_default(t.session), ep);
        if (!r.shake_onset_s || !r.balance_loss_s) {
            ++missing;
            continue;
        }
        worst_shake = std::max(worst_shake, std::abs(*r.shake_onset_s - *t.truth.shake_s));
        worst_loss = std::max(worst_loss, std::abs(*r.balance_loss_s - *t.truth.loss_s));
    }
    int false_events = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        sc.seed = seed;
        const auto rest = sim::synth_session(MotionLabel::Rest, 1 + static_cast<int>(seed % 10), 1, sc);
        const auto r = tandem_analyze(normalize_default(rest.session), ep);
        false_events += r.shake_onset_s.has_value() + r.balance_loss_s.has_value();
    }
    const bool ok = missing == 0 && worst_shake <= 0.5 && worst_loss <= 0.5 && false_events == 0;
    return {ok, format("20 scenarios: %d missed, shake err <= %.3f s, loss err <= %.3f s; %d false events on 20 rest "
                       "recordings",
                       missing, worst_shake, worst_loss, false_events)};
}

Outcome c10_wire() {
    std::mt19937_64 rng(1010);
    std::uniform_int_distribution<std::uint32_t> u32;
    std::uniform_int_distribution<std::uint64_t> u64;
    std::uniform_int_distribution<int> adc(0, 4095), byte(0, 255), bitpos(0, 7), nflips(1, 3);
    std::uniform_int_distribution<std::size_t> body(3, wire::kFrameSize - 1);
    std::size_t roundtrip_bad = 0, corrupt_accepted = 0;
    std::vector<wire::WireFrame> frames;
    for (int i = 0; i < 100000; ++i) {
        wire::WireFrame f;
        f.seq = u32(rng);
        f.timestamp_us = u64(rng);
        for (auto& a : f.adc) a = static_cast<std::uint16_t>(adc(rng));
        const auto enc = wire::encode_frame(f);
        if (!(wire::decode_frame(enc) == f)) ++roundtrip_bad;
        auto bad = enc;
        const int flips = nflips(rng);
        std::vector<std::pair<std::size_t, int>> done;
        while (static_cast<int>(done.size()) < flips) {
            const std::pair<std::size_t, int> p{body(rng), bitpos(rng)};
            if (std::find(done.begin(), done.end(), p) != done.end()) continue;
            done.push_back(p);
            bad[p.first] ^= static_cast<std::uint8_t>(1u << p.second);
        }
        try {
            wire::decode_frame(bad);
            ++corrupt_accepted;
        } catch (const Error& e) {
            if (e.code() != Errc::CrcMismatch) ++corrupt_accepted;
        }
        if (i < 2000) frames.push_back(f);
    }

    // Garbage of 0..3 bytes between frames, fed in random chunks.
    std::size_t resync_lost = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> stream;
        std::vector<wire::WireFrame> sent;
        for (int i = 0; i < 20; ++i) {
            const auto& f = frames[static_cast<std::size_t>(trial * 7 + i) % frames.size()];
            const int garbage = (trial + i) % 4;
            for (int g = 0; g < garbage; ++g) {
                stream.push_back(g == 0 && i % 3 == 0 ? wire::kMagic0 : static_cast<std::uint8_t>(byte(rng)));
            }
            const auto enc = wire::encode_frame(f);
            stream.insert(stream.end(), enc.begin(), enc.end());
            sent.push_back(f);
        }
        wire::FrameReassembler re;
        std::vector<wire::WireFrame> got;
        std::uniform_int_distribution<std::size_t> chunk(1, 97);
        for (std::size_t pos = 0; pos < stream.size();) {
            const std::size_t n = std::min(chunk(rng), stream.size() - pos);
            re.feed(std::span(stream).subspan(pos, n), got);
            pos += n;
        }
        if (got != sent) ++resync_lost;
    }

    sim::SimConfig sc;
    sc.seed = 10;
    const Session session = sim::synth_session(MotionLabel::A3, 1, 1, sc).session;
    IngestServer server(net::Endpoint{"127.0.0.1", 0});
    std::vector<SensorFrame> received;
    IngestStats stats;
    std::thread rx([&] { stats = server.serve([&](const SensorFrame& f) { received.push_back(f); }); });
    sim::stream_session(session, net::Endpoint{"127.0.0.1", server.port()}, 200.0);
    rx.join();
    bool in_order = received.size() == session.frames.size();
    for (std::size_t i = 0; in_order && i < received.size(); ++i) in_order = received[i].seq == i;
    const bool ok = roundtrip_bad == 0 && corrupt_accepted == 0 && resync_lost == 0 && in_order && stats.gaps == 0;
    return {ok, format("1e5 round trips %zu bad, %zu corruptions accepted, %zu/200 resync streams lossy, loopback %zu/%zu "
                       "frames, %llu gaps",
                       roundtrip_bad, corrupt_accepted, resync_lost, received.size(), session.frames.size(),
                       static_cast<unsigned long long>(stats.gaps))};
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "feature oracle", 5.0, c1_feature_oracle},
        {2, "feature identities", 5.0, c2_identities},
        {3, "windowing", 10.0, c3_windowing},
        {4, "pca", 10.0, c4_pca},
        {5, "svm optimizer", 30.0, c5_svm},
        {6, "end-to-end recognition", 300.0, c6_end_to_end},
        {7, "gait", 10.0, c7_gait},
        {8, "chair stand", 30.0, c8_chair},
        {9, "tandem", 30.0, c9_tandem},
        {10, "wire codec", 30.0, c10_wire},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool timely = secs <= c.limit_s;
        const bool pass = out.ok && timely;
        failed += !pass;
        std::printf("criterion %2d %-24s %s  %s; %.2f s (limit %.0f s)%s\n", c.id, c.name, pass ? "PASS" : "FAIL",
                    out.detail.c_str(), secs, c.limit_s, timely ? "" : " TOO SLOW");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
