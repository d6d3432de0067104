#include <cmath>
#include <vector>

#include "calfsense/core.hpp"
#include "calfsense/error.hpp"
#include "doctest.h"

using namespace calfsense;

namespace {

std::vector<SensorFrame> frames(std::size_t n, double fs, auto volts) {
    std::vector<SensorFrame> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].seq = static_cast<std::uint32_t>(i);
        out[i].timestamp_us = static_cast<std::int64_t>(std::llround(static_cast<double>(i) * 1e6 / fs));
        for (std::size_t c = 0; c < kChannels; ++c) out[i].volts[c] = volts(i, c);
    }
    return out;
}

}  // namespace

TEST_CASE("motion labels round-trip") {
    for (auto m : kMotions) CHECK(parse_motion(to_string(m)) == m);
    CHECK(to_string(MotionLabel::A7) == "A7");
    CHECK_FALSE(try_parse_motion("A11").has_value());
    CHECK_THROWS_AS(parse_motion("walk"), Error);
}

TEST_CASE("baseline of a constant is the constant") {
    const auto f = frames(240, 60.0, [](auto, auto) { return 1.0; });
    const auto b = estimate_baseline(f, 2.0);
    for (double v : b.v0) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("baseline of an alternating channel is the midpoint") {
    // 120 alternating samples, then one just past the closed 2 s window
    auto f = frames(121, 60.0, [](std::size_t i, std::size_t c) { return c == 0 ? (i % 2 ? 3.0 : 1.0) : 1.0; });
    f.back().timestamp_us += 1;
    CHECK(estimate_baseline(f, 2.0).v0[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("baseline of a drift ramp is its closed-form mean") {
    // 1.0 V + 0.001 V/s over [0, 2] s, both ends included.
    const auto f = frames(600, 60.0, [](std::size_t i, auto) { return 1.0 + 0.001 * static_cast<double>(i) / 60.0; });
    CHECK(std::abs(estimate_baseline(f, 2.0).v0[0] - 1.001) <= 1e-9);
}

TEST_CASE("normalize computes relative change") {
    Session s;
    s.motion = MotionLabel::A1;
    s.frames = frames(3, 60.0, [](std::size_t i, auto) { return i == 0 ? 1.1 : (i == 1 ? 1.0 : 0.95); });
    BaselineEstimate b;
    b.v0.fill(1.0);
    const auto x = normalize(s, b);
    CHECK(x.x(0, 3) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(x.x(1, 3) == 0.0);
    CHECK(x.x(2, 3) == doctest::Approx(-0.05).epsilon(1e-12));
    CHECK(x.source.motion == MotionLabel::A1);
}

TEST_CASE("normalize rejects a vanishing baseline") {
    Session s;
    s.frames = frames(3, 60.0, [](auto, auto) { return 0.0; });
    BaselineEstimate b;
    b.v0.fill(0.0);
    CHECK_THROWS_AS(normalize(s, b), Error);
}

TEST_CASE("normalize is scale invariant") {
    Session s;
    s.frames = frames(200, 60.0, [](std::size_t i, std::size_t c) { return 1.0 + 0.1 * std::sin(0.1 * double(i + c)); });
    Session t = s;
    for (auto& f : t.frames)
        for (auto& v : f.volts) v *= 2.5;
    const auto a = normalize(s, estimate_baseline(s.frames));
    const auto b = normalize(t, estimate_baseline(t.frames));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t c = 0; c < kChannels; ++c) CHECK(a.x(i, c) == doctest::Approx(b.x(i, c)).epsilon(1e-12));
}

TEST_CASE("baseline needs samples") {
    CHECK_THROWS_AS(estimate_baseline({}, 2.0), Error);
}
