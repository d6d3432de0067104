// Serial reference vs OpenMP kernels on a simulated corpus.
//
//   calfsense_bench [subjects] [repeats]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "calfsense/features.hpp"
#include "calfsense/multiclass.hpp"
#include "calfsense/pipeline.hpp"
#include "calfsense/simulator.hpp"

using namespace calfsense;

static double best_of(int repeats, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

static void report(const char* name, double serial, double parallel, bool same) {
    std::printf("%-22s serial %9.4f s   parallel %9.4f s   speedup %5.2fx   %s\n", name, serial, parallel,
                serial / parallel, same ? "identical" : "MISMATCH");
}

int main(int argc, char** argv) {
    const int subjects = argc > 1 ? std::atoi(argv[1]) : 3;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;
    std::printf("threads: %d, subjects: %d\n", omp_get_max_threads(), subjects);

    sim::SimConfig sc;
    sc.subjects = subjects;
    sc.seed = 7;
    std::vector<Session> sessions;
    for (int s = 1; s <= subjects; ++s) {
        for (auto m : kMotions) {
            for (int k = 1; k <= sc.sets_per_motion; ++k) sessions.push_back(sim::synth_session(m, s, k, sc).session);
        }
    }

    // featurize
    std::vector<NormalizedSeries> series;
    for (const auto& s : sessions) series.push_back(normalize(s, estimate_baseline(s.frames)));
    std::vector<Window> windows;
    for (const auto& s : series) {
        auto w = segment_from(s, WindowSpec{}, 120);
        windows.insert(windows.end(), w.begin(), w.end());
    }
    std::vector<FeatureVector> fs, fp;
    const double fser = best_of(repeats, [&] { fs = reference::featurize_all_serial(windows); });
    const double fpar = best_of(repeats, [&] { fp = featurize_all(windows); });
    bool same = fs.size() == fp.size();
    for (std::size_t i = 0; same && i < fs.size(); ++i) same = fs[i].values == fp[i].values;
    report("featurize", fser, fpar, same);

    // one-vs-one training
    PipelineConfig pc;
    pc.split_seed = 11;
    const auto split = split_dataset(fp, pc.split_seed);
    const Matrix xtrain = to_matrix(split.train);
    std::vector<MotionLabel> labels;
    for (const auto& f : split.train) labels.push_back(f.label);
    MultiClassModel ms, mp;
    auto cfg = pc.model;
    cfg.parallel = false;
    const double tser = best_of(repeats, [&] { ms = train_multiclass(xtrain, labels, cfg); });
    cfg.parallel = true;
    const double tpar = best_of(repeats, [&] { mp = train_multiclass(xtrain, labels, cfg); });
    same = ms.pairs.size() == mp.pairs.size();
    for (std::size_t p = 0; same && p < ms.pairs.size(); ++p) {
        same = ms.pairs[p].model.alphas == mp.pairs[p].model.alphas && ms.pairs[p].model.bias == mp.pairs[p].model.bias;
    }
    report("train one-vs-one", tser, tpar, same);

    // batch prediction
    const Matrix xtest = to_matrix(split.test);
    std::vector<MotionLabel> ps, pp;
    const double pser = best_of(repeats, [&] { ps = mp.predict_batch(xtest, false); });
    const double ppar = best_of(repeats, [&] { pp = mp.predict_batch(xtest, true); });
    report("predict batch", pser, ppar, ps == pp);
    std::printf("windows: %zu train / %zu test\n", split.train.size(), split.test.size());
    return 0;
}
