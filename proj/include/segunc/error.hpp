#pragma once

#include <stdexcept>
#include <string>

namespace segunc {

enum class ErrorCode {
    // grid / input validation
    GeometryMismatch,
    ConstantField,
    RangeViolation,
    UnknownClass,
    InvalidInput,
    // geometry
    EmptySurface,
    InvalidBandSpec,
    InvalidSigma,
    // metric preconditions
    DegenerateRegion,
    EmptyBands,
    SingleClass,
    NoPositives,
    InvalidWindow,
    NoCorrectVoxels,
    NoIncorrectVoxels,
    // statistics
    EmptySample,
    ZeroVariance,
    DegenerateMatrix,
    InconsistentCases,
    AllDegenerate,
    // phantom
    ConfigInvalid,
    // file formats
    BadMagic,
    BadHeader,
    UnsupportedDatatype,
    TruncatedPayload,
    DimMismatch,
    FortranOrderUnsupported,
    IoFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

// True for error codes that describe a metric that cannot be evaluated on an
// otherwise well-formed case (as opposed to malformed input).
bool is_degenerate_metric_error(ErrorCode code);

}  // namespace segunc
