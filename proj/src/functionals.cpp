#include "ckn/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "ckn/errors.hpp"

namespace ckn {

namespace {

double integrate_on(const RadialProfile& u, const RadialFunction& f, double weight_exp, int N,
                    const Quadrature& quad) {
  return quad.integrate(f, weight_exp, N, u.support());
}

std::string cache_key(const CknParams& P, const Quadrature& quad) {
  std::ostringstream os;
  os.precision(17);
  os << P.N << ',' << P.p << ',' << P.mu << ',' << P.s << '|' << quad.fingerprint();
  return os.str();
}

}  // namespace

double grad_integral(const RadialProfile& u, const CknParams& P, const Quadrature& quad) {
  const double p = P.p;
  return integrate_on(
      u, [&](double rho) { return std::pow(std::abs(u.deriv(rho)), p); }, P.mu, P.N, quad);
}

double star_integral(const RadialProfile& u, const CknParams& P, const Quadrature& quad) {
  const double r = derive_unchecked(P).r;
  return integrate_on(
      u, [&](double rho) { return std::pow(std::abs(u.value(rho)), r); }, P.s, P.N, quad);
}

double grad_norm_p(const RadialProfile& u, const CknParams& P, const Quadrature& quad) {
  return std::pow(grad_integral(u, P, quad), 1.0 / P.p);
}

double star_norm(const RadialProfile& u, const CknParams& P, const Quadrature& quad) {
  return std::pow(star_integral(u, P, quad), 1.0 / derive_unchecked(P).r);
}

BestConstant best_constant_report(const CknParams& P, const Quadrature& quad) {
  static std::mutex mutex;
  static std::map<std::string, BestConstant> cache;
  const std::string key = cache_key(P, quad);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double r = derive_unchecked(P).r;
  const RadialProfile U = bubble(P);
  BestConstant out;
  out.grad_integral = grad_integral(U, P, quad);
  out.star_integral = star_integral(U, P, quad);
  out.S = out.grad_integral / std::pow(out.star_integral, P.p / r);
  const double predicted = std::pow(out.S, r / (r - P.p));
  out.consistency = std::abs(out.star_integral - predicted) / out.star_integral;
  if (!(out.consistency <= 1e-7)) {
    std::ostringstream os;
    os << "||U||_*^r = " << out.star_integral << " but S^{r/(r-p)} = " << predicted;
    throw Error(ErrorKind::ConsistencyFailure, os.str());
  }
  std::lock_guard lock(mutex);
  cache.emplace(key, out);
  return out;
}

double best_constant(const CknParams& P, const Quadrature& quad) {
  return best_constant_report(P, quad).S;
}

DeficitReport deficit(const RadialProfile& u, const CknParams& P, const Quadrature& quad) {
  DeficitReport rep;
  rep.S_used = best_constant(P, quad);
  const double gp = grad_integral(u, P, quad);
  const double sr = star_integral(u, P, quad);
  if (gp == 0.0 && sr == 0.0) throw Error(ErrorKind::ZeroFunction, "deficit of the zero profile");
  const double r = derive_unchecked(P).r;
  rep.grad_norm = std::pow(gp, 1.0 / P.p);
  rep.star_norm = std::pow(sr, 1.0 / r);
  rep.ratio = rep.grad_norm / rep.star_norm;
  rep.deficit = gp - rep.S_used * std::pow(rep.star_norm, P.p);
  rep.quotient_vs_S = std::pow(rep.ratio, P.p) / rep.S_used;
  return rep;
}

PoincareRatio poincare_ratio(const RadialProfile& phi, const CknParams& P, const Quadrature& quad) {
  const double r = derive_unchecked(P).r;
  const BubbleShape U = bubble_shape(P);
  const double p = P.p;
  PoincareRatio out;
  out.numerator = integrate_on(
      phi,
      [&](double rho) {
        const double dphi = phi.deriv(rho);
        if (dphi == 0.0) return 0.0;
        return std::exp((p - 2.0) * U.log_abs_deriv(rho)) * dphi * dphi;
      },
      P.mu, P.N, quad);
  out.denominator = integrate_on(
      phi,
      [&](double rho) {
        const double v = phi.value(rho);
        if (v == 0.0) return 0.0;
        return std::exp((r - 2.0) * U.log_value(rho)) * v * v;
      },
      P.s, P.N, quad);
  if (!(out.denominator > 0.0)) {
    throw Error(ErrorKind::DegenerateDenominator, "int |x|^{-s} U^{r-2} phi^2 = 0");
  }
  out.plain = out.numerator / out.denominator;
  out.linearized = (p - 1.0) * out.plain;
  return out;
}

RadialProfile lamlu_transform(const RadialProfile& u, const CknParams& P) {
  const double rv = derive_unchecked(P).rho_var;
  const double c = std::pow(rv, -(P.p - 1.0) / P.p);
  const Support s = u.support();
  const Support target{std::pow(s.lo, 1.0 / rv), std::pow(s.hi, 1.0 / rv)};
  return custom([u, rv, c](double rho) { return c * u.value(std::pow(rho, rv)); },
                [u, rv, c](double rho) {
                  if (rho == 0.0) return rv > 1.0 ? 0.0 : c * u.deriv(0.0);
                  const double R = std::pow(rho, rv);
                  return c * rv * (R / rho) * u.deriv(R);
                },
                "LamLu(" + u.describe() + ")", target);
}

CknParams lamlu_target(const CknParams& P) {
  return CknParams{P.N, P.p, 0.0, derive_unchecked(P).s_prime};
}

double LamLuReport::star_error_stated() const {
  return std::abs(star_factor_observed - star_factor_stated) / star_factor_stated;
}
double LamLuReport::star_error_exact() const {
  return std::abs(star_factor_observed - star_factor_exact) / star_factor_exact;
}
double LamLuReport::S_error_stated() const {
  return std::abs(S_ratio_observed - S_ratio_stated) / S_ratio_stated;
}
double LamLuReport::S_error_exact() const {
  return std::abs(S_ratio_observed - S_ratio_exact) / S_ratio_exact;
}

LamLuReport lamlu_check(const RadialProfile& u, const CknParams& P, const Quadrature& quad) {
  const DerivedParams d = derive_unchecked(P);
  const CknParams Q = lamlu_target(P);
  const double r = d.r;
  const double p = P.p;
  const RadialProfile v = lamlu_transform(u, P);

  LamLuReport rep;
  rep.rho_var = d.rho_var;
  rep.grad_u = grad_integral(u, P, quad);
  rep.grad_v = grad_integral(v, Q, quad);
  rep.star_u = star_integral(u, P, quad);
  rep.star_v = star_integral(v, Q, quad);
  rep.star_factor_observed = rep.star_u / rep.star_v;
  rep.star_factor_stated = d.rho_var;
  rep.star_factor_exact = std::pow(d.rho_var, 1.0 + r * (p - 1.0) / p);

  const RadialProfile U = bubble(P);
  const RadialProfile DU = lamlu_transform(U, P);
  rep.S = best_constant(P, quad);
  rep.S_prime = grad_integral(DU, Q, quad) / std::pow(star_integral(DU, Q, quad), p / r);
  const RadialProfile Uhs = bubble(Q);
  rep.S_prime_closed_form =
      grad_integral(Uhs, Q, quad) / std::pow(star_integral(Uhs, Q, quad), p / r);

  std::vector<double> ratios;
  for (double rho : log_grid(1e-3, 1e3, 61)) ratios.push_back(DU.value(rho) / Uhs.value(rho));
  const double mean = ratios[ratios.size() / 2];
  for (double x : ratios) {
    rep.bubble_shape_deviation = std::max(rep.bubble_shape_deviation, std::abs(x / mean - 1.0));
  }

  rep.S_ratio_observed = rep.S / rep.S_prime;
  rep.S_ratio_stated = std::pow(d.rho_var, -(1.0 / r + p - 1.0));
  rep.S_ratio_exact = std::pow(d.rho_var, -(p / r + p - 1.0));
  return rep;
}

}  // namespace ckn
