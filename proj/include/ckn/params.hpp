#pragma once

#include <string>

namespace ckn {

/// Exponent tuple (N, p, mu, s) of the weighted inequality
///   int |x|^{-mu} |grad u|^p  >=  S ( int |x|^{-s} |u|^r )^{p/r},  r = p(N-s)/(N-p-mu).
/// Only `validate` and `from_ab` produce tuples guaranteed to be admissible.
struct CknParams {
  int N = 0;
  double p = 0.0;
  double mu = 0.0;
  double s = 0.0;

  bool operator==(const CknParams&) const = default;
};

/// Every secondary constant used by the other modules.
struct DerivedParams {
  double r = 0.0;          // Lebesgue exponent p(N-s)/(N-p-mu)
  double a = 0.0;          // mu/p
  double b = 0.0;          // s/r
  double a_c = 0.0;        // (N-p)/p
  double rho_var = 0.0;    // (N-p)/(N-p-mu), exponent of the Lam-Lu radial change
  double s_prime = 0.0;    // (s(N-p) - N mu)/(N-p-mu)
  double K = 0.0;          // p(N-s)/(p-s+mu), effective dimension after rho = tau^sigma
  double sigma = 0.0;      // p/(p-s+mu)
  double inner_exp = 0.0;  // (p-s+mu)/(p-1)
  double decay_exp = 0.0;  // (N-p-mu)/(p-s+mu)
};

/// Boundary slack applied to the closed inequality s/r >= mu/p and to the open ones.
inline constexpr double kBoundarySlack = 1e-14;

CknParams validate(int N, double p, double mu, double s);

/// Derived constants. Asserts the invariants (rho_var > 1, 0 <= s' < p, K > p, the
/// mode-1 gap condition) and throws InvariantViolation when they fail.
DerivedParams derive(const CknParams& params);

/// Derived constants without any invariant checks; valid for limiting tuples such as
/// mu = s = 0 (classical Sobolev) or mu = 0 (Hardy-Sobolev).
DerivedParams derive_unchecked(const CknParams& params);

/// Inverse of the exponent change a = mu/p, b = s/r.
CknParams from_ab(int N, double p, double a, double b);

/// Sides of sigma^2 lambda_1 > K - 1 (lambda_1 = N - 1), written as
/// ((p-s+mu)/p)^2 [p(N-s)/(p-s+mu) - 1] < N - 1.
struct GapCondition {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs > 0.0 && lhs < rhs; }
};

GapCondition gap_condition(const CknParams& params);

/// Lebesgue exponent through the Lam-Lu route, p(N-s')/(N-p).
double r_from_s_prime(const CknParams& params);

std::string describe(const CknParams& params);

}  // namespace ckn
