#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace survbesa {

enum class ErrorCode {
    EmptyDataset,
    DimensionMismatch,
    InvalidValue,
    GridNotSuperset,
    EmptyGrid,
    NoUncensoredEvents,
    InvalidTau,
    DegenerateSubsets,
    InvalidFraction,
    SingleLearner,
    GridMismatch,
    ModelMismatch,
    EmptyPairSet,
    InvalidEpsilon,
    InvalidPhi,
    NonFiniteObjective,
    NoComparablePairs,
    DegenerateVariance,
    NonPositiveScale,
    ParseError,
    MissingColumn,
    DegenerateSplit,
    InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::GridNotSuperset: return "GridNotSuperset";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::NoUncensoredEvents: return "NoUncensoredEvents";
        case ErrorCode::InvalidTau: return "InvalidTau";
        case ErrorCode::DegenerateSubsets: return "DegenerateSubsets";
        case ErrorCode::InvalidFraction: return "InvalidFraction";
        case ErrorCode::SingleLearner: return "SingleLearner";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::ModelMismatch: return "ModelMismatch";
        case ErrorCode::EmptyPairSet: return "EmptyPairSet";
        case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
        case ErrorCode::InvalidPhi: return "InvalidPhi";
        case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
        case ErrorCode::NoComparablePairs: return "NoComparablePairs";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::NonPositiveScale: return "NonPositiveScale";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::DegenerateSplit: return "DegenerateSplit";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Process exit status for a failure: 1 usage, 2 data, 3 numeric.
constexpr int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyDataset:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::InvalidValue:
        case ErrorCode::NoUncensoredEvents:
        case ErrorCode::NoComparablePairs:
        case ErrorCode::ParseError:
        case ErrorCode::MissingColumn:
        case ErrorCode::DegenerateSplit:
        case ErrorCode::EmptyPairSet:
        case ErrorCode::ModelMismatch:
            return 2;
        case ErrorCode::NonFiniteObjective:
        case ErrorCode::DegenerateVariance:
        case ErrorCode::NonPositiveScale:
        case ErrorCode::DegenerateSubsets:
        case ErrorCode::GridNotSuperset:
        case ErrorCode::GridMismatch:
        case ErrorCode::EmptyGrid:
            return 3;
        default:
            return 1;
    }
}

}  // namespace survbesa
