#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckn/params.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

/// log(1 + e^x) without overflow.
double log1p_exp(double x);

/// The family C (1 + rho^beta)^{-m} and its companion ((p-1) - rho^beta)(1 + rho^beta)^{-(m+1)}.
/// With beta = inner_exp this is U and W0; with beta = p/(p-1) it is V and eta0 (tau variable).
/// Every method works in log space, so tails far beyond the double range of rho^beta stay
/// finite.
struct BubbleShape {
  double C = 1.0;
  double beta = 1.0;
  double m = 1.0;
  double p = 2.0;

  double value(double rho) const;
  double deriv(double rho) const;
  double deriv2(double rho) const;
  double log_value(double rho) const;
  /// log |d/drho value|; -inf at rho = 0 when beta > 1.
  double log_abs_deriv(double rho) const;

  double tangent(double rho) const;
  double tangent_deriv(double rho) const;
  /// Zero of the tangent profile, (p-1)^{1/beta}.
  double tangent_zero() const;
};

double normalization_constant(const CknParams& params);

/// Shape of U in the radial variable rho.
BubbleShape bubble_shape(const CknParams& params);
/// Shape of V(tau) = U(tau^sigma) in the tau variable.
BubbleShape transformed_shape(const CknParams& params);

/// (N-p-mu)/p, the dilation weight of U_lambda.
double scaling_exponent(const CknParams& params);
/// k with (N-p-mu)/p U + rho U' = k W0.
double tangent_scale(const CknParams& params);

enum class ProfileKind {
  Bubble,
  ScaledBubble,
  TangentGenerator,
  TransformedBubble,
  KernelEta0,
  Sampled,
  Combination,
  Custom,
};

std::string_view to_string(ProfileKind kind);

namespace detail {
struct ProfileNode;
}

struct SampledData {
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> derivs;  // supplied or monotone (Fritsch-Carlson) slopes
  bool derivs_supplied = false;
};

/// Immutable radial function with value and first derivative; cheap to copy.
class RadialProfile {
 public:
  explicit RadialProfile(std::shared_ptr<const detail::ProfileNode> node);

  ProfileKind kind() const;
  double value(double rho) const;
  double deriv(double rho) const;
  /// Second derivative; available for U, U_lambda, sampled, combinations of those, and custom
  /// profiles built with one. Throws InvalidArgument otherwise.
  double deriv2(double rho) const;
  bool has_deriv2() const;
  Support support() const;
  std::string describe() const;

  /// Scale lambda for the closed-form rho-variable kinds (1 otherwise).
  double scale() const;
  /// Sample data for Sampled profiles, nullptr otherwise.
  const SampledData* sampled() const;
  /// Terms of a Combination, empty otherwise.
  const std::vector<std::pair<double, RadialProfile>>& terms() const;

  double operator()(double rho) const { return value(rho); }

 private:
  std::shared_ptr<const detail::ProfileNode> node_;
};

RadialProfile bubble(const CknParams& params);
RadialProfile bubble_scaled(const CknParams& params, double lambda);
RadialProfile tangent_generator(const CknParams& params);
/// lambda^{(N-p-mu)/p} W0(lambda rho).
RadialProfile tangent_scaled(const CknParams& params, double lambda);
/// d/dlambda U_lambda = lambda^{(N-p-mu)/p - 1} k W0(lambda rho).
RadialProfile bubble_dlambda(const CknParams& params, double lambda);
/// V(tau) = U(tau^sigma); argument is tau.
RadialProfile transformed_bubble(const CknParams& params);
/// eta0(tau) = W0(tau^sigma); argument is tau.
RadialProfile kernel_eta0(const CknParams& params);

/// Monotone cubic Hermite interpolant on a strictly increasing grid; errors outside it.
RadialProfile sampled(std::vector<double> radii, std::vector<double> values,
                      std::vector<double> derivs = {});
/// Samples any profile (value and derivative) on the given radii.
RadialProfile sample(const RadialProfile& profile, const std::vector<double>& radii);

RadialProfile combination(std::vector<std::pair<double, RadialProfile>> terms);

RadialProfile custom(std::function<double(double)> f, std::function<double(double)> df,
                     std::string label = "custom", Support support = {},
                     std::function<double(double)> d2f = {});

RadialProfile operator*(double c, const RadialProfile& u);
RadialProfile operator+(const RadialProfile& u, const RadialProfile& v);
RadialProfile operator-(const RadialProfile& u, const RadialProfile& v);
RadialProfile operator-(const RadialProfile& u);

double eval(const RadialProfile& profile, double rho);
double eval_deriv(const RadialProfile& profile, double rho);
Support support(const RadialProfile& profile);

/// Both sides of -rho^{1-N}(rho^{N-1-mu}|u'|^{p-2}u')' = rho^{-s}|u|^{r-2}u, expanded analytically.
struct ElSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return lhs - rhs; }
  /// |lhs - rhs| / |rhs| (absolute when rhs = 0).
  double relative() const;
};

ElSides el_sides(const CknParams& params, double rho);
ElSides el_sides(const RadialProfile& u, const CknParams& params, double rho);
double el_residual(const CknParams& params, double rho);
double el_residual(const RadialProfile& u, const CknParams& params, double rho);

/// lhs/rhs over a radius set; a constant ratio other than 1 means the equation holds only up to
/// scaling.
struct ElScaling {
  double mean_ratio = 0.0;
  double max_deviation = 0.0;  // max |ratio - mean| / mean
  bool unit() const { return std::abs(mean_ratio - 1.0) <= 1e-8 && max_deviation <= 1e-8; }
};
ElScaling el_scaling(const CknParams& params, const std::vector<double>& radii);

std::vector<double> log_grid(double lo, double hi, int n);

/// CSV with a header row: radius,value[,derivative].
RadialProfile read_profile_csv(std::istream& in);
RadialProfile read_profile_csv(const std::string& path);
void write_profile_csv(std::ostream& out, const std::vector<double>& radii,
                       const RadialProfile& profile, bool with_derivative = true);

}  // namespace ckn
