#pragma once

#include <stdexcept>
#include <string>

namespace windplan {

/// Concrete failure reasons. Each maps onto one CLI exit-code family.
enum class ErrorCode {
  Parse,
  Validation,
  DilationSwallowsEndpoint,
  NoFluidCells,
  InletOnSolid,
  UnstableTau,
  NumericalBlowup,
  DegenerateGoal,
  DimensionMismatch,
  NoPath,
  StartOrGoalBlocked,
  NonFiniteObjective,
  DivergedSimulation,
  EmptyLog,
  TooFewSamples,
  NoOverlap,
  ZeroBaseline,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Error raised while validating a scenario; `field()` names the offending entry.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(ErrorCode::Validation, field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Process exit code for an error family: 2 parse, 3 validation, 4 no-path, 5 numerical.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse:
      return 2;
    case ErrorCode::NoPath:
    case ErrorCode::StartOrGoalBlocked:
    case ErrorCode::DilationSwallowsEndpoint:
      return 4;
    case ErrorCode::NumericalBlowup:
    case ErrorCode::NonFiniteObjective:
    case ErrorCode::DivergedSimulation:
      return 5;
    default:
      return 3;
  }
}

const char* to_string(ErrorCode code);

}  // namespace windplan
