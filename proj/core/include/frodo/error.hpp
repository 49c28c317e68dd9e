#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace frodo {

enum class ErrorCode {
  FormatError,
  CorruptFile,
  NonFiniteData,
  IoError,
  DuplicateSample,
  BadLabel,
  MissingColumn,
  MalformedRow,
  ShapeError,
  InsufficientSamples,
  SingularCovariance,
  MissingStats,
  MissingCalibration,
  BadCalibration,
  NotAProbabilityVector,
  DegenerateLabels,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Process exit status for a failure of the given kind:
/// 2 validation, 3 numerical failure, 4 I/O.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace frodo
