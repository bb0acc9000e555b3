#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ckn/extremals.hpp"
#include "ckn/manifold.hpp"
#include "ckn/params.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

[[noreturn]] void throw_zero_base(const char* where);

/// Weight for p >= 2: x when |x| < |x+y|, else (|x+y|/|x|)^{1/(p-2)} (x+y).
/// Returns x at p = 2. Throws ZeroBase for x = 0 on the second branch.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> omega_bar(
    double p, const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<Derived>& xy);

/// Weight for 1 < p < 2: ((|x+y|)/((2-p)|x+y| + (p-1)|x|))^{1/(p-2)} x when |x| < |x+y|, else x.
/// Returns x at p = 2.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> omega_tilde(
    double p, const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<Derived>& xy);

/// |omega|^{p-2} / |x|^{p-2} for the weight matching p (omega_bar for p >= 2, omega_tilde
/// below), written in terms of |x| and |x+y| only. Finite even when |x| = 0.
double omega_ratio(double p, double abs_x, double abs_xy);

/// |x|^{p-2} |y|^2 + (p-2) |omega|^{p-2} (|x| - |x+y|)^2, nonnegative; 0 when x = 0 and p < 2.
double expansion_bracket(double p, double abs_x, double abs_xy, double abs_y);

enum class GapVariant { TwoSidedPGe2, PLt2SmallR, PLt2LargeR };
std::string to_string(GapVariant v);
GapVariant parse_gap_variant(const std::string& name);
/// The variant matching the tuple: p >= 2, else r <= 2 (small) or r > 2 (large).
GapVariant natural_variant(const CknParams& params);

struct GapFormOptions {
  double gamma0 = 1.0;
  /// Constant in the small-r density (U + C|v|)^r / (U^2 + v^2).
  double C = 1.0;
  /// Smallness proxy: ||v|| <= smallness * ||U||.
  double smallness = 0.1;
};

struct GapForm {
  double lhs = 0.0;
  double rhs = 0.0;
  double tau_hat = 0.0;
  double v_norm = 0.0;  // ||v|| / ||U||
  double margin() const { return lhs - rhs; }
};

/// Both sides of the improved spectral-gap inequality for an orthogonalized radial v; the
/// claim under test is lhs >= rhs. tau_hat normally comes from spectral_gap.
/// Throws BranchMismatch when the variant does not match (p, r), SmallnessViolation when v is
/// too large.
GapForm gap_form(const RadialProfile& v, const CknParams& params, GapVariant variant,
                 double tau_hat, const GapFormOptions& options = {},
                 const Quadrature& quad = RadialRule::standard());

/// Deficit of U + eps w, evaluated against U so that the O(1) parts cancel analytically:
///   A = int (|U' + eps w'|^p - |U'|^p),  B = int (|U + eps w|^r - U^r),
///   deficit = A - ||U||^p expm1((p/r) log1p(B / ||U||_*^r)).
double perturbation_deficit(const CknParams& params, const RadialProfile& w, double eps,
                            const Quadrature& quad = RadialRule::standard());

struct ScanPoint {
  double eps = 0.0;
  double distance = 0.0;
  double deficit = 0.0;
  double ratio_gamma = 0.0;  // deficit / distance^gamma
  double ratio_p = 0.0;      // deficit / distance^p
  ManifoldPoint point;
};

struct ScanReport {
  CknParams params;
  std::string direction;
  std::vector<ScanPoint> points;  // in the order of eps_grid
  double gamma_used = 2.0;
  double fitted_exponent = 0.0;
  double correlation = 0.0;
  int fit_points = 0;
  double lower_bound_B = 0.0;
  /// Distances strictly decrease as eps decreases.
  bool distances_monotone = false;
  /// deficit / distance^p strictly decreases as eps decreases.
  bool ratio_p_decreasing = false;
};

struct ScanOptions {
  int jobs = 1;
  DistanceOptions distance;
};

/// The scan without the final assertions. eps_grid: at least 8 log-spaced values in (0, 0.3].
/// Throws InvalidArgument; OptimizerStall propagates.
ScanReport stability_scan_report(const CknParams& params, const RadialProfile& direction,
                                 const std::vector<double>& eps_grid,
                                 const ScanOptions& options = {},
                                 const RadialRule& rule = RadialRule::standard());

/// As above, then throws DegenerateFit (correlation < 0.99) or StabilityViolation
/// (lower_bound_B <= 0).
ScanReport stability_scan(const CknParams& params, const RadialProfile& direction,
                          const std::vector<double>& eps_grid, const ScanOptions& options = {},
                          const RadialRule& rule = RadialRule::standard());

/// n log-spaced values from hi down to lo.
std::vector<double> log_spaced(double lo, double hi, int n);

/// Orthogonalized, normalized test directions: U times Gaussians in log rho centered at
/// rho = 0.4, 1.5, 4 (widths 0.8, 1.2, 1.6).
std::vector<RadialProfile> scan_directions(const CknParams& params,
                                           const Quadrature& quad = RadialRule::standard());

struct ExpansionReport {
  double grad_p = 0.0;        // ||c U_lambda + d w||^p
  double lower_bound = 0.0;   // right side of the gradient expansion
  double star_r = 0.0;        // ||c U_lambda + d w||_*^r
  double upper_bound = 0.0;   // right side of the star-norm expansion
  double margin_lower = 0.0;  // grad_p - lower_bound, claimed >= 0
  double margin_upper = 0.0;  // upper_bound - star_r, claimed >= 0
  double pairing_grad = 0.0;  // int |x|^{-mu} |U_l'|^{p-2} U_l' w'
  double pairing_star = 0.0;  // int |x|^{-s} U_l^{r-1} w
};

/// Pointwise second-order expansions of the gradient and star norms of cU_lambda + d w,
/// integrated. C1 and C2 normally come from search_constant. Throws SmallnessViolation for
/// |d| > 0.1.
ExpansionReport expansion_check(const CknParams& params, double c, double lambda,
                                const RadialProfile& w, double d, double kappa, double C1,
                                double C2, const Quadrature& quad = RadialRule::standard());

// ---------------------------------------------------------------------------------------

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> omega_bar(
    double p, const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<Derived>& xy) {
  using Vec = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
  const auto nx = x.norm();
  const auto nxy = xy.norm();
  if (p == 2.0 || nx < nxy) return Vec(x);
  if (nx == 0) throw_zero_base("omega_bar");
  using std::pow;
  return Vec(pow(nxy / nx, 1.0 / (p - 2.0)) * xy);
}

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> omega_tilde(
    double p, const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<Derived>& xy) {
  using Vec = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
  const auto nx = x.norm();
  const auto nxy = xy.norm();
  if (p == 2.0 || nxy <= nx) return Vec(x);
  using std::pow;
  return Vec(pow(nxy / ((2.0 - p) * nxy + (p - 1.0) * nx), 1.0 / (p - 2.0)) * x);
}

}  // namespace ckn
