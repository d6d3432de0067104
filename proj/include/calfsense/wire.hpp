#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "calfsense/core.hpp"

namespace calfsense::wire {

inline constexpr std::uint8_t kMagic0 = 0xA5;
inline constexpr std::uint8_t kMagic1 = 0x5A;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kFrameSize = 49;
inline constexpr std::size_t kCrcOffset = kFrameSize - 2;

// Layout (little-endian):
//   0  magic A5 5A
//   2  version
//   3  seq          u32
//   7  timestamp_us u64
//  15  adc[16]      u16
//  47  crc16        CRC-16/CCITT-FALSE over bytes 0..46
struct WireFrame {
    std::uint32_t seq = 0;
    std::uint64_t timestamp_us = 0;
    std::array<std::uint16_t, kChannels> adc{};

    friend bool operator==(const WireFrame&, const WireFrame&) = default;
};

using EncodedFrame = std::array<std::uint8_t, kFrameSize>;

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) noexcept;

EncodedFrame encode_frame(const WireFrame& frame) noexcept;

// Throws Error with Truncated, BadMagic, UnsupportedVersion or CrcMismatch.
WireFrame decode_frame(std::span<const std::uint8_t> bytes);

struct AdcScale {
    double vref = 3.3;
    std::uint32_t full_scale = 4095;

    static AdcScale from_bits(double vref, int bits);
};

// raw * vref / full_scale. Throws Error(OutOfRange) when raw > full_scale.
double adc_to_volts(std::uint32_t raw, const AdcScale& scale);
// Nearest count, clamped to [0, full_scale].
std::uint16_t volts_to_adc(double volts, const AdcScale& scale) noexcept;

SensorFrame to_sensor_frame(const WireFrame& frame, const AdcScale& scale);
WireFrame to_wire_frame(const SensorFrame& frame, const AdcScale& scale) noexcept;

struct ReassemblyStats {
    std::uint64_t frames_decoded = 0;
    std::uint64_t crc_failures = 0;
    std::uint64_t version_failures = 0;
    std::uint64_t bytes_discarded = 0;
};

// Rebuilds frames from an arbitrary chunking of a byte stream. After a bad
// frame it slides forward byte by byte to the next magic. One corrupted
// region counts as one failure even when it holds spurious magic bytes.
class FrameReassembler {
public:
    // Appends decoded frames to out.
    void feed(std::span<const std::uint8_t> bytes, std::vector<WireFrame>& out);

    const ReassemblyStats& stats() const noexcept { return stats_; }
    std::size_t buffered() const noexcept { return buffer_.size() - head_; }

private:
    void compact();

    std::vector<std::uint8_t> buffer_;
    std::size_t head_ = 0;
    std::uint64_t offset_ = 0;          // stream position of buffer_[0]
    std::uint64_t suppress_until_ = 0;  // failures before this belong to the last bad frame
    ReassemblyStats stats_;
};

}  // namespace calfsense::wire
