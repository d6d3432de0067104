#include <cstdint>
#include <random>
#include <vector>

#include "calfsense/error.hpp"
#include "calfsense/wire.hpp"
#include "doctest.h"

using namespace calfsense;
using namespace calfsense::wire;

namespace {

// Bit-at-a-time CRC-16/CCITT-FALSE.
std::uint16_t crc_oracle(const std::uint8_t* p, std::size_t n) {
    std::uint16_t crc = 0xFFFF;
    for (std::size_t i = 0; i < n; ++i) {
        for (int b = 7; b >= 0; --b) {
            const bool bit = ((p[i] >> b) & 1) != ((crc >> 15) & 1);
            crc = static_cast<std::uint16_t>(crc << 1);
            if (bit) crc ^= 0x1021;
        }
    }
    return crc;
}

WireFrame random_frame(std::mt19937_64& rng) {
    WireFrame f;
    f.seq = static_cast<std::uint32_t>(rng());
    f.timestamp_us = rng();
    for (auto& a : f.adc) a = static_cast<std::uint16_t>(rng() % 4096);
    return f;
}

Errc decode_error(const EncodedFrame& bytes) {
    try {
        decode_frame(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("decode accepted a bad frame");
    return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("crc check value") {
    const std::uint8_t msg[] = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
    CHECK(crc16_ccitt_false(msg) == 0x29B1);
    CHECK(crc_oracle(msg, 9) == 0x29B1);
}

TEST_CASE("crc matches the bitwise oracle") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 500; ++t) {
        std::vector<std::uint8_t> v(rng() % 100);
        for (auto& b : v) b = static_cast<std::uint8_t>(rng());
        CHECK(crc16_ccitt_false(v) == crc_oracle(v.data(), v.size()));
    }
}

TEST_CASE("zero frame layout") {
    const auto enc = encode_frame(WireFrame{});
    CHECK(enc[0] == 0xA5);
    CHECK(enc[1] == 0x5A);
    CHECK(enc[2] == 0x01);
    for (std::size_t i = 3; i < kCrcOffset; ++i) CHECK(enc[i] == 0);
    const std::uint16_t crc = crc_oracle(enc.data(), kCrcOffset);
    CHECK(enc[47] == (crc & 0xFF));
    CHECK(enc[48] == (crc >> 8));
}

TEST_CASE("fields are little-endian") {
    WireFrame f;
    f.seq = 0x01020304;
    f.timestamp_us = 0x0A0B0C0D0E0F1011ULL;
    f.adc[0] = 0x0FFF;
    const auto enc = encode_frame(f);
    CHECK(enc[3] == 0x04);
    CHECK(enc[6] == 0x01);
    CHECK(enc[7] == 0x11);
    CHECK(enc[14] == 0x0A);
    CHECK(enc[15] == 0xFF);
    CHECK(enc[16] == 0x0F);
}

TEST_CASE("decode errors") {
    std::mt19937_64 rng(5);
    const auto good = encode_frame(random_frame(rng));
    CHECK(decode_frame(good) == decode_frame(good));

    auto last = good;
    last[48] ^= 0xFF;
    CHECK(decode_error(last) == Errc::CrcMismatch);

    auto magic = good;
    magic[0] = 0x00;
    CHECK(decode_error(magic) == Errc::BadMagic);

    auto version = good;
    version[2] = 0x02;
    CHECK(decode_error(version) == Errc::UnsupportedVersion);

    CHECK_THROWS_AS(decode_frame(std::span(good).first(48)), Error);
}

TEST_CASE("adc conversion") {
    const AdcScale s;
    CHECK(adc_to_volts(0, s) == 0.0);
    CHECK(adc_to_volts(4095, s) == doctest::Approx(3.3).epsilon(1e-15));
    CHECK(adc_to_volts(2048, s) == doctest::Approx(1.6504029304).epsilon(1e-10));
    CHECK_THROWS_AS(adc_to_volts(4096, s), Error);
    CHECK(volts_to_adc(-1.0, s) == 0);
    CHECK(volts_to_adc(9.0, s) == 4095);
    for (std::uint32_t raw = 0; raw <= 4095; raw += 7) CHECK(volts_to_adc(adc_to_volts(raw, s), s) == raw);
    CHECK(AdcScale::from_bits(5.0, 10).full_scale == 1023);
}

TEST_CASE("reassembler handles any chunking") {
    std::mt19937_64 rng(8);
    std::vector<WireFrame> sent;
    std::vector<std::uint8_t> stream;
    for (int i = 0; i < 50; ++i) {
        sent.push_back(random_frame(rng));
        const auto e = encode_frame(sent.back());
        stream.insert(stream.end(), e.begin(), e.end());
    }
    for (std::size_t chunk : {1u, 2u, 7u, 48u, 49u, 50u, 1000u}) {
        FrameReassembler re;
        std::vector<WireFrame> got;
        for (std::size_t p = 0; p < stream.size(); p += chunk) {
            re.feed(std::span(stream).subspan(p, std::min(chunk, stream.size() - p)), got);
        }
        CHECK(got == sent);
        CHECK(re.buffered() == 0);
        CHECK(re.stats().crc_failures == 0);
    }
}

TEST_CASE("reassembler resyncs after a corrupted frame") {
    std::mt19937_64 rng(9);
    std::vector<WireFrame> sent;
    std::vector<std::uint8_t> stream;
    for (int i = 0; i < 10; ++i) {
        sent.push_back(random_frame(rng));
        auto e = encode_frame(sent.back());
        if (i == 4) e[20] ^= 0x40;
        stream.insert(stream.end(), e.begin(), e.end());
    }
    FrameReassembler re;
    std::vector<WireFrame> got;
    re.feed(stream, got);
    sent.erase(sent.begin() + 4);
    CHECK(got == sent);
    CHECK(re.stats().crc_failures == 1);
}

TEST_CASE("reassembler skips leading garbage") {
    std::mt19937_64 rng(10);
    const WireFrame f = random_frame(rng);
    const auto e = encode_frame(f);
    std::vector<std::uint8_t> stream = {0x00, 0xA5, 0xA5, 0x5A, 0x01};
    stream.insert(stream.end(), e.begin(), e.end());
    FrameReassembler re;
    std::vector<WireFrame> got;
    re.feed(stream, got);
    REQUIRE(got.size() == 1);
    CHECK(got[0] == f);
    CHECK(re.stats().bytes_discarded == 5);
}

TEST_CASE("sensor frame conversion") {
    WireFrame w;
    w.seq = 7;
    w.timestamp_us = 123456;
    w.adc.fill(2048);
    const auto s = to_sensor_frame(w, AdcScale{});
    CHECK(s.seq == 7);
    CHECK(s.timestamp_us == 123456);
    CHECK(to_wire_frame(s, AdcScale{}) == w);
}
