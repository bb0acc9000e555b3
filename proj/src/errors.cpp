#include "ckn/errors.hpp"

namespace ckn {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfRegion: return "OutOfRegion";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NonPositiveScale: return "NonPositiveScale";
    case ErrorKind::OutOfGrid: return "OutOfGrid";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularIntegrand: return "SingularIntegrand";
    case ErrorKind::ConsistencyFailure: return "ConsistencyFailure";
    case ErrorKind::ZeroFunction: return "ZeroFunction";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::OptimizerStall: return "OptimizerStall";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NonPositiveGap: return "NonPositiveGap";
    case ErrorKind::ZeroBase: return "ZeroBase";
    case ErrorKind::BranchMismatch: return "BranchMismatch";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::StabilityViolation: return "StabilityViolation";
    case ErrorKind::SmallnessViolation: return "SmallnessViolation";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view to_string(Clause clause) {
  switch (clause) {
    case Clause::DimensionTooSmall: return "N >= 2";
    case Clause::PRange: return "1 < p < N";
    case Clause::MuRange: return "0 < mu < N-p";
    case Clause::SOverRLower: return "s/r >= mu/p";
    case Clause::SOverRUpper: return "s/r < mu/p + 1";
  }
  return "unknown clause";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoConvergence:
    case ErrorKind::SingularIntegrand:
    case ErrorKind::OptimizerStall:
    case ErrorKind::GridTooCoarse:
      return 3;
    case ErrorKind::ConsistencyFailure:
    case ErrorKind::NonPositiveGap:
    case ErrorKind::InvariantViolation:
    case ErrorKind::StabilityViolation:
    case ErrorKind::DegenerateFit:
    case ErrorKind::SingularGram:
      return 2;
    default:
      return 1;
  }
}

}  // namespace ckn
