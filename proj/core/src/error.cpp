#include "frodo/error.hpp"

namespace frodo {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::NonFiniteData: return "NonFiniteData";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DuplicateSample: return "DuplicateSample";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::MissingStats: return "MissingStats";
    case ErrorCode::MissingCalibration: return "MissingCalibration";
    case ErrorCode::BadCalibration: return "BadCalibration";
    case ErrorCode::NotAProbabilityVector: return "NotAProbabilityVector";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularCovariance: return 3;
    case ErrorCode::IoError: return 4;
    default: return 2;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace frodo
