#ifndef CROSSDIFF_ERROR_HPP
#define CROSSDIFF_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace crossdiff {

enum class ErrorCode {
  InvalidGrid,
  LengthMismatch,
  NonFiniteValue,
  GridMismatch,
  IndexOutOfGhostRange,
  UnknownPreset,
  InvalidParameter,
  NonPositiveCutoff,
  NotPositiveDefinite,
  NonFiniteState,
  UnsupportedCombination,
  DegenerateInput,
  DegenerateReference,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::IndexOutOfGhostRange: return "IndexOutOfGhostRange";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NonPositiveCutoff: return "NonPositiveCutoff";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-status mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crossdiff

#endif  // CROSSDIFF_ERROR_HPP
