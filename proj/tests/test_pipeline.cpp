#include <filesystem>
#include <fstream>
#include <sstream>

#include "calfsense/config.hpp"
#include "calfsense/error.hpp"
#include "calfsense/pipeline.hpp"
#include "calfsense/seed.hpp"
#include "calfsense/simulator.hpp"
#include "doctest.h"

using namespace calfsense;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("calfsense_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
    CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
}

TEST_CASE("config round trip") {
    RunConfig a;
    a.set("seed", "99");
    a.set("window.length_s", "4");
    a.set("window.mode", "fixed");
    a.set("svm.kernel", "linear");
    a.set("events.theta_factor", "3.5");
    a.set("sim.tandem.loss_s", "none");
    std::stringstream io;
    a.write(io);
    RunConfig b;
    b.load(io);
    for (const auto& k : RunConfig::keys()) CHECK(a.get(k) == b.get(k));
    CHECK(b.pipeline.window.mode == WindowMode::Fixed);
    CHECK_FALSE(b.health.tandem.loss_s.has_value());
}

TEST_CASE("config errors name the problem") {
    RunConfig c;
    CHECK_THROWS_AS(c.set("no.such.key", "1"), Error);
    CHECK_THROWS_AS(c.set("sim.subjects", "ten"), Error);
    std::istringstream in("seed=1\nwindow.overlap\n");
    try {
        c.load(in, "test.cfg");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
    }
    c = {};
    c.set("events.release_factor", "5");
    CHECK_THROWS_AS(c.resolve(), Error);
}

TEST_CASE("resolve derives stage seeds") {
    RunConfig a, b;
    a.seed = b.seed = 11;
    a.resolve();
    b.resolve();
    CHECK(a.sim.seed == b.sim.seed);
    CHECK(a.sim.seed != a.pipeline.split_seed);
    CHECK(a.pipeline.model.train.seed != a.pipeline.split_seed);
}

TEST_CASE("small corpus end to end, deterministic") {
    sim::SimConfig sc;
    sc.subjects = 2;
    sc.seed = 3;
    std::vector<Session> sessions;
    for (int s = 1; s <= 2; ++s)
        for (auto m : kMotions)
            for (int k = 1; k <= 4; ++k) sessions.push_back(sim::synth_session(m, s, k, sc).session);
    PipelineConfig pc;
    pc.split_seed = 4;
    const auto f = extract_features(sessions, pc);
    CHECK(f.size() == sessions.size() * 87);  // windows after the 2 s preamble
    const auto a = train_and_evaluate(f, pc);
    const auto b = train_and_evaluate(f, pc);
    CHECK(a.evaluation.metrics.macro_recall >= 0.9);
    std::ostringstream ma, mb;
    write_metrics_report(a.evaluation.metrics, ma);
    write_metrics_report(b.evaluation.metrics, mb);
    CHECK(ma.str() == mb.str());
}

TEST_CASE("single-class training reports its stage") {
    sim::SimConfig sc;
    sc.subjects = 1;
    std::vector<Session> sessions;
    for (int k = 1; k <= 4; ++k) sessions.push_back(sim::synth_session(MotionLabel::A1, 1, k, sc).session);
    const auto f = extract_features(sessions, PipelineConfig{});
    try {
        train_and_evaluate(f, PipelineConfig{});
        FAIL("expected SingleClassInput");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SingleClassInput);
        CHECK(e.stage() == "train");
    }
}

TEST_CASE("dataset export and reload") {
    const auto dir = temp_dir("export");
    sim::SimConfig sc;
    sc.subjects = 1;
    sc.trial_s = 10.0;
    sc.seed = 5;
    const auto entries = sim::export_dataset(dir, sc);
    CHECK(entries.size() == 40);
    const std::string manifest = slurp(dir / "manifest.csv");
    CHECK(manifest.rfind("file,subject,motion,set,frames,sample_rate_hz\n", 0) == 0);
    const auto loaded = load_dataset(dir);
    REQUIRE(loaded.size() == 40);
    CHECK(loaded[0].subject_id == "S01");
    CHECK(loaded[0].frames.size() == 600);

    const auto dir2 = temp_dir("export2");
    sim::export_dataset(dir2, sc);
    CHECK(slurp(dir2 / "manifest.csv") == manifest);
    CHECK(slurp(dir2 / "S01_A4_2.csv") == slurp(dir / "S01_A4_2.csv"));
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("sweep grid and best row") {
    CHECK(sweep_grid().size() == 15);
    std::vector<SweepRow> rows(3);
    rows[0].window = WindowSpec::sliding(4.0, 0.5);
    rows[0].macro_recall = 0.97;
    rows[1].window = WindowSpec::sliding(2.0, 0.5);
    rows[1].macro_recall = 0.97;
    rows[2].window = WindowSpec::fixed(6.0);
    rows[2].macro_recall = 0.90;
    mark_best(rows);
    CHECK_FALSE(rows[0].best);
    CHECK(rows[1].best);
    CHECK_FALSE(rows[2].best);
}
