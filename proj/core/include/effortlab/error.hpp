#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace effortlab {

enum class ErrorCode {
  kInvalidArgument,
  kNonFinite,
  kNotCola,
  kInconsistentGrid,
  kUndefinedTilt,
  kNoVoicing,
  kDegenerateStats,
  kNoActivity,
  kConvergence,
  kConfig,
  kIo,
  kFormat,
  kMaskerTooShort,
  kEmptyInput,
  kSequencing,
  kConflict,
  kNotFound,
  kExhausted,
  kSessionDone,
  kGone,
};

std::string_view ToString(ErrorCode code);

// Base exception for every failure raised by the library. The code is
// stable and is what callers (CLI exit status, HTTP error bodies) map on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when an iterative controller cannot hit its target. Carries the
// closest value it reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double best_value)
      : Error(ErrorCode::kConvergence, message), best_value_(best_value) {}

  double best_value() const noexcept { return best_value_; }

 private:
  double best_value_;
};

}  // namespace effortlab
