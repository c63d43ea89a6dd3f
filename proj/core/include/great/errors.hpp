#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace great {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kRankDeficient,
  kEmpty,
  kInvalidRho,
  kAssumptionViolated,
  kInfeasible,
  kTooShort,
  kUnobservable,
  kHorizonExceeded,
  kLengthMismatch,
  kZeroReference,
  kPartitionMismatch,
  kUnreachable,
  kEmptyGrid,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (notably the CLI) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kInvalidRho: return "InvalidRho";
    case ErrorCode::kAssumptionViolated: return "AssumptionViolated";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kUnobservable: return "Unobservable";
    case ErrorCode::kHorizonExceeded: return "HorizonExceeded";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kZeroReference: return "ZeroReference";
    case ErrorCode::kPartitionMismatch: return "PartitionMismatch";
    case ErrorCode::kUnreachable: return "Unreachable";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace great
