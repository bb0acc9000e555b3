#include "ckn/params.hpp"

#include <cmath>
#include <sstream>

#include "ckn/errors.hpp"

namespace ckn {

namespace {

double slack(double value) { return kBoundarySlack * std::max(1.0, std::abs(value)); }

}  // namespace

CknParams validate(int N, double p, double mu, double s) {
  if (!std::isfinite(p) || !std::isfinite(mu) || !std::isfinite(s)) {
    throw Error(ErrorKind::NonFinite, "exponents must be finite");
  }
  if (N < 2) throw OutOfRegion(Clause::DimensionTooSmall, "N = " + std::to_string(N));
  if (!(p > 1.0 && p < N)) throw OutOfRegion(Clause::PRange);
  if (!(mu > 0.0 && mu < N - p)) throw OutOfRegion(Clause::MuRange);

  const double r = p * (N - s) / (N - p - mu);
  const double s_over_r = s / r;
  const double lower = mu / p;
  const double upper = mu / p + 1.0;
  if (s_over_r < lower - slack(lower)) {
    std::ostringstream os;
    os << "s/r = " << s_over_r << " < mu/p = " << lower;
    throw OutOfRegion(Clause::SOverRLower, os.str());
  }
  if (!(s_over_r < upper - slack(upper))) {
    std::ostringstream os;
    os << "s/r = " << s_over_r << " >= mu/p + 1 = " << upper;
    throw OutOfRegion(Clause::SOverRUpper, os.str());
  }
  return CknParams{N, p, mu, s};
}

DerivedParams derive_unchecked(const CknParams& P) {
  const double N = P.N;
  const double p = P.p;
  const double mu = P.mu;
  const double s = P.s;
  DerivedParams d;
  d.r = p * (N - s) / (N - p - mu);
  d.a = mu / p;
  d.b = s / d.r;
  d.a_c = (N - p) / p;
  d.rho_var = (N - p) / (N - p - mu);
  d.s_prime = (s * (N - p) - N * mu) / (N - p - mu);
  d.K = p * (N - s) / (p - s + mu);
  d.sigma = p / (p - s + mu);
  d.inner_exp = (p - s + mu) / (p - 1.0);
  d.decay_exp = (N - p - mu) / (p - s + mu);
  return d;
}

DerivedParams derive(const CknParams& P) {
  const DerivedParams d = derive_unchecked(P);
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvariantViolation, what); };
  if (!(d.rho_var > 1.0)) fail("rho_var > 1");
  if (!(d.s_prime >= -slack(P.p) && d.s_prime < P.p)) fail("0 <= s' < p");
  if (!(d.K > P.p)) fail("K > p");
  if (!(d.r > P.p)) fail("r > p");
  if (!gap_condition(P).holds()) fail("sigma^2 (N-1) > K-1");
  return d;
}

CknParams from_ab(int N, double p, double a, double b) {
  if (!std::isfinite(p) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorKind::NonFinite, "exponents must be finite");
  }
  if (a < 0.0) throw OutOfRegion(Clause::MuRange, "a = mu/p must be nonnegative");
  // r(N - p - mu) = p(N - s) with s = b r gives r = pN / (N - p(1 + a - b)).
  const double mu = a * p;
  const double r = p * N / (N - p * (1.0 + a - b));
  const double s = b * r;
  return validate(N, p, mu, s);
}

GapCondition gap_condition(const CknParams& P) {
  const double q = (P.p - P.s + P.mu) / P.p;
  return {q * q * (P.p * (P.N - P.s) / (P.p - P.s + P.mu) - 1.0), P.N - 1.0};
}

double r_from_s_prime(const CknParams& P) {
  const DerivedParams d = derive_unchecked(P);
  return P.p * (P.N - d.s_prime) / (P.N - P.p);
}

std::string describe(const CknParams& P) {
  std::ostringstream os;
  os << "(N=" << P.N << ", p=" << P.p << ", mu=" << P.mu << ", s=" << P.s << ")";
  return os.str();
}

}  // namespace ckn
