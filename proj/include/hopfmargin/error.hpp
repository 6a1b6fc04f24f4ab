#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hopfmargin {

enum class ErrorKind {
  InvalidParameter,
  DimensionMismatch,
  NonFiniteInput,
  NonFiniteDerivative,
  SingularJacobian,
  NoConvergence,
  BranchLost,
  EigenFailure,
  UnstableStart,
  NoBifurcation,
  EigenvalueCollision,
  NonTransversal,
  SingularAtBifurcation,
  DegenerateNormal,
  TangentialDirection,
  StepUnderflow,
  NonFiniteState,
  WindowTooLong,
  ConfigError,
  MismatchedReports,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace hopfmargin
