#include "spdkit/error.hpp"

namespace spdkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateDivergence: return "DegenerateDivergence";
    case ErrorCode::StepOverflow: return "StepOverflow";
    case ErrorCode::InvalidStart: return "InvalidStart";
    case ErrorCode::InvalidGradient: return "InvalidGradient";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::CorruptFile: return "CorruptFile";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::DegenerateDivergence:
    case ErrorCode::StepOverflow:
    case ErrorCode::InvalidGradient:
    case ErrorCode::NumericalBreakdown:
    case ErrorCode::SingularSystem:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace spdkit
