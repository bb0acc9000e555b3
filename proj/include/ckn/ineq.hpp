#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ckn {

/// Two sides of a pointwise inequality; margin() is oriented so that >= 0 means it holds.
/// scale is the sum of the absolute values of the terms, for roundoff-aware comparisons.
struct Margin {
  double value = 0.0;
  double scale = 0.0;
  /// value < -rel * scale.
  bool violated(double rel = 1e-12) const { return value < -rel * scale; }
};

/// Lower expansion of |x+y|^p written through |x|, |x+y|, |y| and x.y:
///   |x+y|^p - [|x|^p + p|x|^{p-2} x.y + (1-kappa)/2 p bracket + C1 T],
/// T = |y|^p for p >= 2 and min(|y|^p, |x|^{p-2}|y|^2) below.
Margin vector_expansion(double p, double kappa, double abs_x, double abs_xy, double abs_y,
                        double x_dot_y, double C1);

Margin check_vector_expansion(double p, double kappa, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, double C1);

enum class ScalarBranch { SmallR, LargeR };
std::string to_string(ScalarBranch b);
/// SmallR for r <= 2.
ScalarBranch branch_for(double r);

/// Upper expansion of |a+b|^r; margin = right side - |a+b|^r.
///   SmallR: |a|^r + r|a|^{r-2}ab + (r(r-1)/2 + kappa) (|a| + C2|b|)^r b^2 / (a^2 + b^2)
///   LargeR: |a|^r + r|a|^{r-2}ab + (r(r-1)/2 + kappa) |a|^{r-2} b^2 + C2 |b|^r
/// Throws BranchMismatch when the branch does not match r.
Margin check_scalar_expansion(double r, double kappa, double a, double b, double C2,
                              ScalarBranch branch);

struct VectorPair {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Deterministic samples: Gaussian directions with log-uniform magnitudes in [1e-3, 1e3].
/// Every fourth sample is the ray y = -t x and the one after it has y orthogonal to x.
/// The stream is prefix-stable: the first n samples do not depend on count.
std::vector<VectorPair> sample_vector_pairs(int N, int count, std::uint64_t seed);
std::vector<std::pair<double, double>> sample_scalar_pairs(int count, std::uint64_t seed);

enum class ConstantKind { C1, C2 };
std::string to_string(ConstantKind k);

struct ConstantSearch {
  ConstantKind kind = ConstantKind::C1;
  double parameter = 0.0;  // p for C1, r for C2
  double kappa = 0.0;
  int N = 0;               // vector dimension (C1 only)
  int samples = 0;
  std::uint64_t seed = 0;
  double constant = 0.0;
  /// Smallest margin over the samples at the returned constant.
  double worst_margin = 0.0;
  int violations = 0;
};

/// Largest C1 (p) or smallest C2 (r) without sampled violations, by bisection to width 1e-3.
/// Feasibility is monotone in the constant, so the estimate can only tighten as samples grow.
ConstantSearch search_constant(ConstantKind kind, double parameter, double kappa, int samples,
                               std::uint64_t seed, int N = 5, int jobs = 1);

/// Violations and worst margin of a given constant on a fresh sample set.
ConstantSearch count_violations(ConstantKind kind, double parameter, double kappa,
                                double constant, int samples, std::uint64_t seed, int N = 5,
                                int jobs = 1);

}  // namespace ckn
