#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sepgl {

enum class ErrorCode {
    // structure validation
    EmptyGroup,
    IndexOutOfRange,
    UncoveredVariable,
    NonpositiveWeight,
    // numerics
    DimensionMismatch,
    InvalidExponent,
    NegativeLambda,
    InvalidArgument,
    UnsupportedPenalty,
    StepSizeFailure,
    NonFiniteObjective,
    SearchExhausted,
    NoFullSupport,
    InvalidRange,
    InvalidOverlap,
    FactorizationFailure,
    AllZeroTruth,
    ZeroTruth,
    SingleClass,
    TooFewReplicates,
    // files and configs
    ParseError,
    ValidationError,
    EmptyAfterFilter,
    RaggedRows,
    NonNumericCell,
    InvalidConfig,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by malformed input data rather than numerical breakdown.
bool is_data_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace sepgl
