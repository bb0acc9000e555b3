#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ckn {

using RadialFunction = std::function<double(double)>;

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_panels = 4000;
  double split_point = 1.0;
  int panel_order = 32;

  void check() const;
  std::string fingerprint() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

enum class Normalization {
  Radial,     // int_0^inf f(rho) rho^{N-1-w} d rho
  FullSpace,  // the same times |S^{N-1}|
};

/// Radial interval on which an integrand may be evaluated.
struct Support {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool bounded_below() const { return lo > 0.0; }
  bool bounded_above() const { return hi < std::numeric_limits<double>::infinity(); }
  bool contains(double rho) const { return rho >= lo && rho <= hi; }
  Support intersect(const Support& other) const;
};

double sphere_area(int N);

/// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);

/// Adaptive integral of f(rho) rho^{N-1-w} over the support (default (0, inf)).
///
/// Both halves around `split_point` are mapped to t = log(rho / split_point), where power-law
/// behaviour at the origin and at infinity becomes exponential. Each half is covered by
/// growing chunks until their contribution is negligible, then panels are bisected globally
/// (worst error first). The per-panel error is the difference between the panel estimate and
/// the sum over its two halves.
QuadratureResult integrate_radial(const RadialFunction& f, double weight_exp, int N,
                                  const QuadratureSpec& spec,
                                  Normalization normalization = Normalization::FullSpace,
                                  const Support& support = {});

/// Fixed composite Gauss-Legendre rule with uniform panels in log-radius.
/// Used where the same integral is evaluated many times over a family of integrands.
class RadialRule {
 public:
  static RadialRule log_uniform(double rho_lo, double rho_hi, double panel_width = 0.25,
                                int order = 32);

  /// Default rule: log-radius in [-80, 80] (clipped to the support).
  static RadialRule standard(const Support& support = {});

  std::span<const double> radii() const { return radii_; }
  /// d rho weights (already include the log-map Jacobian).
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return radii_.size(); }
  Support support() const { return {lo_, hi_}; }

  double integrate(const RadialFunction& f, double weight_exp, int N,
                   Normalization normalization = Normalization::FullSpace) const;

 private:
  std::vector<double> radii_;
  std::vector<double> weights_;
  double lo_ = 0.0, hi_ = 0.0;
};

/// Either an adaptive spec or a fixed rule; functionals accept both.
class Quadrature {
 public:
  Quadrature(QuadratureSpec spec) : spec_(spec) {}  // NOLINT(implicit)
  Quadrature(RadialRule rule) : spec_(), rule_(std::move(rule)), fixed_(true) {}  // NOLINT

  double integrate(const RadialFunction& f, double weight_exp, int N,
                   const Support& support = {}) const;

  bool fixed() const { return fixed_; }
  const QuadratureSpec& spec() const { return spec_; }
  const RadialRule& rule() const { return rule_; }
  std::string fingerprint() const;

 private:
  QuadratureSpec spec_;
  RadialRule rule_;
  bool fixed_ = false;
};

}  // namespace ckn
