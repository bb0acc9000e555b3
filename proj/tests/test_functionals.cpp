#include <cmath>
#include <numbers>

#include "ckn/errors.hpp"
#include "ckn/functionals.hpp"
#include "ckn/manifold.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace ckn;
using namespace ckn::testing;

namespace {
const double kPi = std::numbers::pi;
const double kOracle = 19.2 * kPi * kPi;
}  // namespace

TEST_CASE("norms at the reference tuple") {
  const RadialProfile U = bubble(kStar);
  CHECK(grad_norm_p(U, kStar) == doctest::Approx(std::sqrt(kOracle)).epsilon(1e-10));
  CHECK(star_norm(U, kStar) == doctest::Approx(std::cbrt(kOracle)).epsilon(1e-10));
  const BestConstant S = best_constant_report(kStar);
  CHECK(S.S == doctest::Approx(std::cbrt(kOracle)).epsilon(1e-9));
  CHECK(std::pow(S.S, 3.0) == doctest::Approx(kOracle).epsilon(1e-8));
  CHECK(S.consistency <= 1e-8);
  CHECK(grad_norm_p(U, kStar) == doctest::Approx(13.7657).epsilon(1e-5));
  CHECK(star_norm(U, kStar) == doctest::Approx(5.7434).epsilon(1e-4));
}

TEST_CASE("best constant is consistent across the suite") {
  for (const CknParams& P : suite()) {
    const BestConstant S = best_constant_report(P);
    CHECK(S.consistency <= 1e-8);
    CHECK(S.S > 0.0);
    // Same value with the fixed rule.
    const Quadrature fixed(RadialRule::standard());
    CHECK(best_constant(P, fixed) == doctest::Approx(S.S).epsilon(1e-9));
  }
}

TEST_CASE("unweighted Sobolev limit") {
  const CknParams P{5, 2, 0, 0};
  const RadialProfile U = bubble(P);
  const double ratio = grad_integral(U, P) / std::pow(star_integral(U, P), 2.0 / (10.0 / 3.0));
  CHECK(best_constant(P) == doctest::Approx(ratio).epsilon(1e-12));
  // Classical value S_N = pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N} for p = 2.
  const double classical = kPi * 5 * 3 * std::pow(std::tgamma(2.5) / std::tgamma(5.0), 0.4);
  CHECK(best_constant(P) == doctest::Approx(classical).epsilon(1e-9));
}

TEST_CASE("homogeneity and scaling invariance") {
  for (const CknParams& P : suite()) {
    const RadialProfile U = bubble(P);
    const double g = grad_norm_p(U, P);
    const double s = star_norm(U, P);
    for (double c : {-2.0, 0.5}) {
      CHECK(grad_norm_p(c * U, P) == doctest::Approx(std::abs(c) * g).epsilon(1e-10));
      CHECK(star_norm(c * U, P) == doctest::Approx(std::abs(c) * s).epsilon(1e-10));
      const DeficitReport d = deficit(c * power_bump(P.N), P);
      const DeficitReport d1 = deficit(power_bump(P.N), P);
      CHECK(d.deficit == doctest::Approx(std::pow(std::abs(c), P.p) * d1.deficit).epsilon(1e-8));
      CHECK(d.ratio == doctest::Approx(d1.ratio).epsilon(1e-9));
    }
    for (double lambda : {0.5, 2.0}) {
      const RadialProfile Ul = bubble_scaled(P, lambda);
      CHECK(grad_norm_p(Ul, P) == doctest::Approx(g).epsilon(1e-8));
      CHECK(star_norm(Ul, P) == doctest::Approx(s).epsilon(1e-8));
    }
  }
  CHECK(star_norm(0.0 * bubble(kStar), kStar) == 0.0);
}

TEST_CASE("deficit") {
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const RadialProfile U = bubble(P);
    const DeficitReport d = deficit(U, P);
    CHECK(std::abs(d.deficit) <= 1e-8 * std::pow(d.grad_norm, P.p));
    CHECK(d.quotient_vs_S == doctest::Approx(1.0).epsilon(1e-8));
    const DeficitReport d2 = deficit(2.0 * bubble_scaled(P, 0.5), P);
    CHECK(std::abs(d2.deficit) <= 1e-8 * std::pow(d2.grad_norm, P.p));
    const RadialProfile w = normalized(project_tangent_orthogonal(modulated_bubble(P, 2.0, 0.7), P), P);
    const DeficitReport d3 = deficit(U + 0.01 * w, P);
    CHECK(d3.deficit > 0.0);
    CHECK(d3.ratio >= std::pow(d3.S_used, 1.0 / P.p));
  }
  try {
    deficit(0.0 * bubble(kStar), kStar);
    FAIL("expected ZeroFunction");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroFunction);
  }
}

TEST_CASE("Poincare ratio") {
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const double r = derive(P).r;
    const PoincareRatio u = poincare_ratio(bubble(P), P);
    CHECK(u.plain == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(u.linearized == doctest::Approx(P.p - 1.0).epsilon(1e-9));
    const PoincareRatio w = poincare_ratio(tangent_generator(P), P);
    CHECK(w.linearized == doctest::Approx(r - 1.0).epsilon(1e-9));
    CHECK(w.plain == doctest::Approx((r - 1.0) / (P.p - 1.0)).epsilon(1e-9));
    for (double center : {0.1, 1.0, 10.0}) {
      const PoincareRatio m = poincare_ratio(modulated_bubble(P, center, 1.0), P);
      CHECK(m.linearized >= std::min(1.0, P.p - 1.0) - 1e-6);
    }
  }
  CHECK_THROWS_AS(poincare_ratio(0.0 * bubble(kStar), kStar), Error);
}

TEST_CASE("Lam-Lu transform") {
  // varrho = 1 leaves profiles unchanged.
  const CknParams flat{5, 2, 0, 0.5};
  const RadialProfile U = bubble(kStar);
  const RadialProfile same = lamlu_transform(U, flat);
  for (double rho : {0.1, 1.0, 7.0}) {
    CHECK(same.value(rho) == doctest::Approx(U.value(rho)).epsilon(1e-15));
    CHECK(same.deriv(rho) == doctest::Approx(U.deriv(rho)).epsilon(1e-14));
  }
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const LamLuReport rep = lamlu_check(bubble(P), P);
    CHECK(rep.grad_v == doctest::Approx(rep.grad_u).epsilon(1e-9));
    CHECK(rep.star_error_exact() <= 1e-8);
    CHECK(rep.S_error_exact() <= 1e-8);
    CHECK(rep.S_prime == doctest::Approx(rep.S_prime_closed_form).epsilon(1e-8));
    CHECK(rep.bubble_shape_deviation <= 1e-10);
    // A second profile obeys the same change-of-variable factors.
    const LamLuReport other = lamlu_check(modulated_bubble(P, 3.0, 0.8), P);
    CHECK(other.grad_v == doctest::Approx(other.grad_u).epsilon(1e-9));
    CHECK(other.star_error_exact() <= 1e-8);
  }
}
