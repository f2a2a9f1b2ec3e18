#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace singlab {

enum class ErrorCode {
  SingularConfiguration,
  SingularDirection,
  AssumptionViolation,
  NegativeArgument,
  DomainError,
  DegenerateGrid,
  GridMismatch,
  BoundaryMismatch,
  MaxIterations,
  LineSearchFailure,
  StepUnderflow,
  NonFiniteState,
  NotCentralConfiguration,
  AmbiguousEvent,
  WindowTooShort,
  ExponentMismatch,
  EmptyCentralSet,
  NoConvergence,
  QuadratureFailure,
  PathThroughSingularity,
  NotSubspaceArrangement,
  NotOnDelta,
  InvalidArgument,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so callers
/// (the CLI in particular) can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when a configuration lies within the singularity floor of the collision set.
/// `index` is the offending sample when the configuration came from a path.
class SingularConfiguration : public Error {
 public:
  explicit SingularConfiguration(const std::string& what, long index = -1)
      : Error(ErrorCode::SingularConfiguration, what), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularConfiguration: return "SingularConfiguration";
    case ErrorCode::SingularDirection: return "SingularDirection";
    case ErrorCode::AssumptionViolation: return "AssumptionViolation";
    case ErrorCode::NegativeArgument: return "NegativeArgument";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::BoundaryMismatch: return "BoundaryMismatch";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::LineSearchFailure: return "LineSearchFailure";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NotCentralConfiguration: return "NotCentralConfiguration";
    case ErrorCode::AmbiguousEvent: return "AmbiguousEvent";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::ExponentMismatch: return "ExponentMismatch";
    case ErrorCode::EmptyCentralSet: return "EmptyCentralSet";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::PathThroughSingularity: return "PathThroughSingularity";
    case ErrorCode::NotSubspaceArrangement: return "NotSubspaceArrangement";
    case ErrorCode::NotOnDelta: return "NotOnDelta";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace singlab
