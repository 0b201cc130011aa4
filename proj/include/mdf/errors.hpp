#pragma once
#include <stdexcept>
#include <string>

namespace mdf {

enum class ErrorCode {
  BadGrid,
  NonSmoothCenter,
  DegeneratePsi,
  HorizonInProfile,
  NonConvergentMass,
  TailDivergence,
  IndefiniteOperator,
  NoConvergence,
  NonPositiveW,
  NonPositiveConformalFactor,
  CflViolation,
  NegativePsiInterior,
  NoNeckFound,
  CapCurvatureTooHigh,
  InsufficientData,
  BadConfig,
  BadCheckpoint,
  Io,
};

const char* to_string(ErrorCode c);

/// All failures raised by the library carry a code so callers (and the CLI
/// exit-code mapping) can tell numerical breakdowns from usage errors.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace mdf
