#pragma once

#include <stdexcept>
#include <string>

namespace bootmatch {

enum class ErrorCode {
  RowCountMismatch,
  NonFiniteValue,
  DegeneratePeriods,
  SingleArmOnly,
  IndexOutOfBounds,
  DegenerateSample,
  InsufficientData,
  EmptyDesign,
  SingleClass,
  SingularDesign,
  DimensionMismatch,
  NoControls,
  NoTreated,
  EmptyMatch,
  EmptyGroup,
  OutOfRangeP,
  SampleTooSmall,
  TooManyFailures,
  ParseError,
  ConfigInvalid,
  DomainError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::RowCountMismatch: return "RowCountMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DegeneratePeriods: return "DegeneratePeriods";
    case ErrorCode::SingleArmOnly: return "SingleArmOnly";
    case ErrorCode::IndexOutOfBounds: return "IndexOutOfBounds";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyDesign: return "EmptyDesign";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoControls: return "NoControls";
    case ErrorCode::NoTreated: return "NoTreated";
    case ErrorCode::EmptyMatch: return "EmptyMatch";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::OutOfRangeP: return "OutOfRangeP";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::DomainError: return "DomainError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bootmatch
