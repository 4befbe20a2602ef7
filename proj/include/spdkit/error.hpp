#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spdkit {

enum class ErrorCode {
  InvalidInput,
  NotPositiveDefinite,
  DimensionMismatch,
  DegenerateDivergence,
  StepOverflow,
  InvalidStart,
  InvalidGradient,
  NumericalBreakdown,
  SingularSystem,
  InvalidDataset,
  CorruptFile,
};

std::string_view to_string(ErrorCode code);

// True for codes that signal a numerical failure rather than bad input.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace spdkit
