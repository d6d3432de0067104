#include "calfsense/wire.hpp"

#include <cmath>
#include <string>

#include "calfsense/error.hpp"

namespace calfsense::wire {

namespace {

constexpr std::array<std::uint16_t, 256> make_crc_table() {
    std::array<std::uint16_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        auto crc = static_cast<std::uint16_t>(i << 8);
        for (int bit = 0; bit < 8; ++bit) {
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                 : static_cast<std::uint16_t>(crc << 1);
        }
        table[i] = crc;
    }
    return table;
}

constexpr auto kCrcTable = make_crc_table();

template <typename T>
void put_le(std::uint8_t* dst, T value) noexcept {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        dst[i] = static_cast<std::uint8_t>(value >> (8 * i));
    }
}

template <typename T>
T get_le(const std::uint8_t* src) noexcept {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(static_cast<T>(src[i]) << (8 * i));
    }
    return value;
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) noexcept {
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t b : bytes) {
        crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ b) & 0xFF]);
    }
    return crc;
}

EncodedFrame encode_frame(const WireFrame& frame) noexcept {
    EncodedFrame out{};
    out[0] = kMagic0;
    out[1] = kMagic1;
    out[2] = kVersion;
    put_le<std::uint32_t>(&out[3], frame.seq);
    put_le<std::uint64_t>(&out[7], frame.timestamp_us);
    for (std::size_t c = 0; c < kChannels; ++c) {
        put_le<std::uint16_t>(&out[15 + 2 * c], frame.adc[c]);
    }
    put_le<std::uint16_t>(&out[kCrcOffset],
                          crc16_ccitt_false(std::span(out).first(kCrcOffset)));
    return out;
}

WireFrame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFrameSize) {
        throw Error(Errc::Truncated, "need " + std::to_string(kFrameSize) + " bytes, have " +
                                         std::to_string(bytes.size()));
    }
    if (bytes[0] != kMagic0 || bytes[1] != kMagic1) {
        throw Error(Errc::BadMagic, "frame does not start with A5 5A");
    }
    if (bytes[2] != kVersion) {
        throw Error(Errc::UnsupportedVersion, "version " + std::to_string(bytes[2]));
    }
    const auto expected = get_le<std::uint16_t>(&bytes[kCrcOffset]);
    const auto actual = crc16_ccitt_false(bytes.first(kCrcOffset));
    if (expected != actual) {
        throw Error(Errc::CrcMismatch, "crc field " + std::to_string(expected) +
                                           " != computed " + std::to_string(actual));
    }
    WireFrame frame;
    frame.seq = get_le<std::uint32_t>(&bytes[3]);
    frame.timestamp_us = get_le<std::uint64_t>(&bytes[7]);
    for (std::size_t c = 0; c < kChannels; ++c) {
        frame.adc[c] = get_le<std::uint16_t>(&bytes[15 + 2 * c]);
    }
    return frame;
}

AdcScale AdcScale::from_bits(double vref, int bits) {
    if (bits < 1 || bits > 16) {
        throw Error(Errc::InvalidArgument, "adc bits must be in 1..16");
    }
    if (!(vref > 0.0)) throw Error(Errc::InvalidArgument, "vref must be positive");
    return {vref, (1u << bits) - 1u};
}

double adc_to_volts(std::uint32_t raw, const AdcScale& scale) {
    if (raw > scale.full_scale) {
        throw Error(Errc::OutOfRange, "raw count " + std::to_string(raw) + " exceeds full scale " +
                                          std::to_string(scale.full_scale));
    }
    return static_cast<double>(raw) * scale.vref / static_cast<double>(scale.full_scale);
}

std::uint16_t volts_to_adc(double volts, const AdcScale& scale) noexcept {
    const double counts = std::round(volts / scale.vref * static_cast<double>(scale.full_scale));
    if (!(counts > 0.0)) return 0;
    if (counts >= static_cast<double>(scale.full_scale)) {
        return static_cast<std::uint16_t>(scale.full_scale);
    }
    return static_cast<std::uint16_t>(counts);
}

SensorFrame to_sensor_frame(const WireFrame& frame, const AdcScale& scale) {
    SensorFrame out;
    out.seq = frame.seq;
    out.timestamp_us = static_cast<std::int64_t>(frame.timestamp_us);
    for (std::size_t c = 0; c < kChannels; ++c) out.volts[c] = adc_to_volts(frame.adc[c], scale);
    return out;
}

WireFrame to_wire_frame(const SensorFrame& frame, const AdcScale& scale) noexcept {
    WireFrame out;
    out.seq = frame.seq;
    out.timestamp_us = static_cast<std::uint64_t>(frame.timestamp_us);
    for (std::size_t c = 0; c < kChannels; ++c) out.adc[c] = volts_to_adc(frame.volts[c], scale);
    return out;
}

void FrameReassembler::feed(std::span<const std::uint8_t> bytes, std::vector<WireFrame>& out) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());

    while (buffer_.size() - head_ >= 2) {
        const std::uint8_t* p = buffer_.data() + head_;
        if (p[0] != kMagic0 || p[1] != kMagic1) {
            ++head_;
            ++stats_.bytes_discarded;
            continue;
        }
        if (buffer_.size() - head_ < kFrameSize) break;

        const std::span<const std::uint8_t> candidate(p, kFrameSize);
        const bool version_ok = p[2] == kVersion;
        const bool crc_ok =
            crc16_ccitt_false(candidate.first(kCrcOffset)) == get_le<std::uint16_t>(p + kCrcOffset);
        if (version_ok && crc_ok) {
            out.push_back(decode_frame(candidate));
            ++stats_.frames_decoded;
            head_ += kFrameSize;
            continue;
        }
        const std::uint64_t position = offset_ + head_;
        if (position >= suppress_until_) {
            if (!version_ok) {
                ++stats_.version_failures;
            } else {
                ++stats_.crc_failures;
            }
            suppress_until_ = position + kFrameSize;
        }
        ++head_;
        ++stats_.bytes_discarded;
    }
    compact();
}

void FrameReassembler::compact() {
    if (head_ > 4096 || head_ == buffer_.size()) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
        offset_ += head_;
        head_ = 0;
    }
}

}  // namespace calfsense::wire
