#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ckn {

enum class ErrorKind {
  OutOfRegion,
  NonFinite,
  NonPositiveScale,
  OutOfGrid,
  NoConvergence,
  SingularIntegrand,
  ConsistencyFailure,
  ZeroFunction,
  DegenerateDenominator,
  OptimizerStall,
  SingularGram,
  GridTooCoarse,
  NonPositiveGap,
  ZeroBase,
  BranchMismatch,
  DegenerateFit,
  DomainError,
  InvariantViolation,
  StabilityViolation,
  SmallnessViolation,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Which admissibility inequality an exponent tuple violated.
enum class Clause {
  DimensionTooSmall,  // N >= 2
  PRange,             // 1 < p < N
  MuRange,            // 0 < mu < N - p
  SOverRLower,        // s/r >= mu/p
  SOverRUpper,        // s/r < mu/p + 1
};

std::string_view to_string(Clause clause);

class OutOfRegion : public Error {
 public:
  explicit OutOfRegion(Clause clause, const std::string& detail = {})
      : Error(ErrorKind::OutOfRegion,
              std::string(to_string(clause)) + (detail.empty() ? "" : " (" + detail + ")")),
        clause_(clause) {}

  Clause clause() const noexcept { return clause_; }

 private:
  Clause clause_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double achieved_error)
      : Error(ErrorKind::NoConvergence, what), achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

class OptimizerStall : public Error {
 public:
  OptimizerStall(const std::string& what, double best_c, double best_lambda, double best_distance)
      : Error(ErrorKind::OptimizerStall, what),
        best_c_(best_c),
        best_lambda_(best_lambda),
        best_distance_(best_distance) {}

  double best_c() const noexcept { return best_c_; }
  double best_lambda() const noexcept { return best_lambda_; }
  double best_distance() const noexcept { return best_distance_; }

 private:
  double best_c_, best_lambda_, best_distance_;
};

class NonPositiveGap : public Error {
 public:
  NonPositiveGap(int mode, double gap)
      : Error(ErrorKind::NonPositiveGap,
              "mode " + std::to_string(mode) + " gap " + std::to_string(gap)),
        mode_(mode) {}

  int mode() const noexcept { return mode_; }

 private:
  int mode_;
};

/// Process exit code for an error kind: 1 usage/input, 2 failed assertion, 3 non-convergence.
int exit_code_for(ErrorKind kind);

}  // namespace ckn
