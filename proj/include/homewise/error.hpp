#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace homewise {

/// Closed set of failure kinds raised by the library. The string form is the
/// machine-readable `code` used by the HTTP error body and CLI diagnostics.
enum class ErrorCode {
  EmptyInput,
  AllRejected,
  MissingRequired,
  OutOfRange,
  MissingColumn,
  UnparseableHeader,
  UnknownZone,
  SeriesTooShort,
  DegenerateDesign,
  ModelClimateMismatch,
  FactorOutOfBand,
  NegativeInput,
  EmptyList,
  IoFailure,
  DirectoryNotFound,
  EmptyId,
  AllDatasetsFailed,
  NotFound,
  UnknownMethod,
  UnknownFormat,
  InvalidArgument,
  Internal,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AllRejected: return "AllRejected";
    case ErrorCode::MissingRequired: return "MissingRequired";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparseableHeader: return "UnparseableHeader";
    case ErrorCode::UnknownZone: return "UnknownZone";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::ModelClimateMismatch: return "ModelClimateMismatch";
    case ErrorCode::FactorOutOfBand: return "FactorOutOfBand";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DirectoryNotFound: return "DirectoryNotFound";
    case ErrorCode::EmptyId: return "EmptyId";
    case ErrorCode::AllDatasetsFailed: return "AllDatasetsFailed";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::UnknownMethod: return "UnknownMethod";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

/// Errors that describe bad input rather than a broken environment.
constexpr bool is_validation_error(ErrorCode code) noexcept {
  return code != ErrorCode::IoFailure && code != ErrorCode::Internal;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::vector<std::string> details = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(std::move(message)),
        details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::vector<std::string> details_;
};

}  // namespace homewise
