#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace calfsense {

enum class Errc {
    InvalidArgument,
    InsufficientData,
    DegenerateBaseline,
    BadMagic,
    UnsupportedVersion,
    CrcMismatch,
    Truncated,
    OutOfRange,
    BindFailure,
    ConnectionError,
    ConnectionRefused,
    BackpressureTimeout,
    MalformedHeader,
    RowArity,
    NonNumericCell,
    SeriesTooShort,
    EmptyWindow,
    TooFewSamples,
    NonFiniteInput,
    DimensionMismatch,
    SingleClassInput,
    ClassTooSmall,
    MissingSets,
    UnknownLabel,
    EmptySeries,
    NoCyclesDetected,
    NoRestSegment,
    NegativePressure,
    UnknownMotion,
    InvalidScenarioParams,
    IoError,
    BadModelFile,
};

std::string_view to_string(Errc code) noexcept;

// All library failures surface as this type; code() distinguishes them.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }
    // Pipeline stage that raised the error, empty outside the pipeline.
    const std::string& stage() const noexcept { return stage_; }
    Error with_stage(std::string stage) const;

private:
    Errc code_;
    std::string stage_;
};

}  // namespace calfsense
