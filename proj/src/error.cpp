#include "sepgl/error.hpp"

namespace sepgl {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UncoveredVariable: return "UncoveredVariable";
    case ErrorCode::NonpositiveWeight: return "NonpositiveWeight";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::NegativeLambda: return "NegativeLambda";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnsupportedPenalty: return "UnsupportedPenalty";
    case ErrorCode::StepSizeFailure: return "StepSizeFailure";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::SearchExhausted: return "SearchExhausted";
    case ErrorCode::NoFullSupport: return "NoFullSupport";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidOverlap: return "InvalidOverlap";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::AllZeroTruth: return "AllZeroTruth";
    case ErrorCode::ZeroTruth: return "ZeroTruth";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TooFewReplicates: return "TooFewReplicates";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

bool is_data_error(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::EmptyGroup:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::UncoveredVariable:
    case ErrorCode::NonpositiveWeight:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidExponent:
    case ErrorCode::NegativeLambda:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnsupportedPenalty:
    case ErrorCode::InvalidRange:
    case ErrorCode::InvalidOverlap:
    case ErrorCode::ZeroTruth:
    case ErrorCode::SingleClass:
    case ErrorCode::TooFewReplicates:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::EmptyAfterFilter:
    case ErrorCode::RaggedRows:
    case ErrorCode::NonNumericCell:
    case ErrorCode::InvalidConfig:
    case ErrorCode::IoError:
        return true;
    default:
        return false;
    }
}

} // namespace sepgl
