#include "hopfmargin/error.hpp"

namespace hopfmargin {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::NonFiniteDerivative: return "NonFiniteDerivative";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::BranchLost: return "BranchLost";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::UnstableStart: return "UnstableStart";
    case ErrorKind::NoBifurcation: return "NoBifurcation";
    case ErrorKind::EigenvalueCollision: return "EigenvalueCollision";
    case ErrorKind::NonTransversal: return "NonTransversal";
    case ErrorKind::SingularAtBifurcation: return "SingularAtBifurcation";
    case ErrorKind::DegenerateNormal: return "DegenerateNormal";
    case ErrorKind::TangentialDirection: return "TangentialDirection";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::WindowTooLong: return "WindowTooLong";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::MismatchedReports: return "MismatchedReports";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hopfmargin
