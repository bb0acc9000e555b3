#pragma once

#include <string>

#include "ckn/extremals.hpp"
#include "ckn/params.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

/// int |x|^{-mu} |u'|^p over R^N.
double grad_integral(const RadialProfile& u, const CknParams& params, const Quadrature& quad = QuadratureSpec{});
/// int |x|^{-s} |u|^r over R^N.
double star_integral(const RadialProfile& u, const CknParams& params, const Quadrature& quad = QuadratureSpec{});

double grad_norm_p(const RadialProfile& u, const CknParams& params, const Quadrature& quad = QuadratureSpec{});
double star_norm(const RadialProfile& u, const CknParams& params, const Quadrature& quad = QuadratureSpec{});

struct BestConstant {
  double S = 0.0;
  double grad_integral = 0.0;   // ||U||^p
  double star_integral = 0.0;   // ||U||_*^r
  double consistency = 0.0;     // | ||U||_*^r - S^{r/(r-p)} | / ||U||_*^r
};

/// S = ||U||^p / ||U||_*^p, cross-checked against ||U||_*^r = S^{r/(r-p)}.
/// Throws ConsistencyFailure beyond 1e-7. Cached per (params, quadrature fingerprint).
BestConstant best_constant_report(const CknParams& params, const Quadrature& quad = QuadratureSpec{});
double best_constant(const CknParams& params, const Quadrature& quad = QuadratureSpec{});

struct DeficitReport {
  double grad_norm = 0.0;
  double star_norm = 0.0;
  double ratio = 0.0;
  double deficit = 0.0;
  double quotient_vs_S = 0.0;
  double S_used = 0.0;
};

/// ||u||^p - S ||u||_*^p and companions. Throws ZeroFunction for u = 0.
DeficitReport deficit(const RadialProfile& u, const CknParams& params, const Quadrature& quad = QuadratureSpec{});

struct PoincareRatio {
  double numerator = 0.0;    // int |x|^{-mu} |U'|^{p-2} phi'^2
  double denominator = 0.0;  // int |x|^{-s} U^{r-2} phi^2
  /// numerator / denominator.
  double plain = 0.0;
  /// (p-1) * plain: the second variation of the gradient term for radial phi.
  double linearized = 0.0;
};

/// Throws DegenerateDenominator when the weighted L2 mass of phi vanishes.
PoincareRatio poincare_ratio(const RadialProfile& phi, const CknParams& params, const Quadrature& quad = QuadratureSpec{});

/// v(rho) = varrho^{-(p-1)/p} u(rho^varrho), varrho = (N-p)/(N-p-mu).
RadialProfile lamlu_transform(const RadialProfile& u, const CknParams& params);

/// Weighted data of the flattened problem: weights (0, s') and the same (N, p, r).
CknParams lamlu_target(const CknParams& params);

struct LamLuReport {
  double rho_var = 0.0;
  double grad_u = 0.0;  // int |x|^{-mu} |u'|^p
  double grad_v = 0.0;  // int |v'|^p
  double star_u = 0.0;  // int |x|^{-s} |u|^r
  double star_v = 0.0;  // int |x|^{-s'} |v|^r
  double star_factor_observed = 0.0;   // star_u / star_v
  double star_factor_stated = 0.0;     // varrho
  double star_factor_exact = 0.0;      // varrho^{1 + r(p-1)/p}
  double S = 0.0;
  double S_prime = 0.0;                // Hardy-Sobolev quotient of the transformed bubble
  double S_prime_closed_form = 0.0;    // same quotient at the (N, p, 0, s') bubble
  double bubble_shape_deviation = 0.0; // max relative deviation of DU / U_HS from a constant
  double S_ratio_observed = 0.0;       // S / S'
  double S_ratio_stated = 0.0;         // varrho^{-(1/r + p - 1)}
  double S_ratio_exact = 0.0;          // varrho^{-(p/r + p - 1)}

  double star_error_stated() const;
  double star_error_exact() const;
  double S_error_stated() const;
  double S_error_exact() const;
};

/// Change-of-variable identities evaluated on u (normally U) by independent quadratures.
LamLuReport lamlu_check(const RadialProfile& u, const CknParams& params, const Quadrature& quad = QuadratureSpec{});

}  // namespace ckn
