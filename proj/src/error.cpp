#include "calfsense/error.hpp"

namespace calfsense {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::DegenerateBaseline: return "DegenerateBaseline";
        case Errc::BadMagic: return "BadMagic";
        case Errc::UnsupportedVersion: return "UnsupportedVersion";
        case Errc::CrcMismatch: return "CrcMismatch";
        case Errc::Truncated: return "Truncated";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::BindFailure: return "BindFailure";
        case Errc::ConnectionError: return "ConnectionError";
        case Errc::ConnectionRefused: return "ConnectionRefused";
        case Errc::BackpressureTimeout: return "BackpressureTimeout";
        case Errc::MalformedHeader: return "MalformedHeader";
        case Errc::RowArity: return "RowArity";
        case Errc::NonNumericCell: return "NonNumericCell";
        case Errc::SeriesTooShort: return "SeriesTooShort";
        case Errc::EmptyWindow: return "EmptyWindow";
        case Errc::TooFewSamples: return "TooFewSamples";
        case Errc::NonFiniteInput: return "NonFiniteInput";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::SingleClassInput: return "SingleClassInput";
        case Errc::ClassTooSmall: return "ClassTooSmall";
        case Errc::MissingSets: return "MissingSets";
        case Errc::UnknownLabel: return "UnknownLabel";
        case Errc::EmptySeries: return "EmptySeries";
        case Errc::NoCyclesDetected: return "NoCyclesDetected";
        case Errc::NoRestSegment: return "NoRestSegment";
        case Errc::NegativePressure: return "NegativePressure";
        case Errc::UnknownMotion: return "UnknownMotion";
        case Errc::InvalidScenarioParams: return "InvalidScenarioParams";
        case Errc::IoError: return "IoError";
        case Errc::BadModelFile: return "BadModelFile";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error Error::with_stage(std::string stage) const {
    Error e(code_, std::string(what()).substr(to_string(code_).size() + 2));
    e.stage_ = std::move(stage);
    return e;
}

}  // namespace calfsense
