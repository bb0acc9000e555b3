#include <cmath>
#include <vector>

#include "ckn/errors.hpp"
#include "ckn/params.hpp"
#include "doctest.h"

using namespace ckn;

namespace {

std::vector<CknParams> suite() {
  return {validate(5, 2, 1, 2), validate(5, 3, 0.5, 2), validate(4, 1.5, 0.5, 1),
          validate(4, 1.25, 0.5, 1.5)};
}

Clause clause_of(int N, double p, double mu, double s) {
  try {
    validate(N, p, mu, s);
  } catch (const OutOfRegion& e) {
    return e.clause();
  }
  FAIL("expected OutOfRegion");
  return Clause::DimensionTooSmall;
}

}  // namespace

TEST_CASE("validate accepts the reference tuple") {
  const CknParams P = validate(5, 2, 1, 2);
  CHECK(P.N == 5);
  CHECK(derive(P).r == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("validate names the violated clause") {
  CHECK(clause_of(5, 2, 1, 1) == Clause::SOverRLower);
  CHECK(clause_of(5, 2, 4, 1) == Clause::MuRange);
  CHECK(clause_of(5, 2, 0, 1) == Clause::MuRange);
  CHECK(clause_of(5, 1, 1, 1) == Clause::PRange);
  CHECK(clause_of(5, 5, 1, 1) == Clause::PRange);
  CHECK(clause_of(1, 0.5, 1, 1) == Clause::DimensionTooSmall);
  // N=6, p=2, mu=1, s=3: r = 2, s/r = 1.5 = mu/p + 1.
  CHECK(clause_of(6, 2, 1, 3) == Clause::SOverRUpper);
}

TEST_CASE("validate rejects non-finite input") {
  CHECK_THROWS_AS(validate(5, NAN, 1, 2), Error);
  try {
    validate(5, 2, INFINITY, 2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
  }
}

TEST_CASE("left boundary s/r = mu/p is accepted") {
  // N=5, p=2, mu=1: r = 5 - s, so s/r = 1/2 at s = 5/3.
  const CknParams P = validate(5, 2, 1, 5.0 / 3.0);
  const DerivedParams d = derive_unchecked(P);
  CHECK(d.b == doctest::Approx(d.a).epsilon(1e-14));
  CHECK(d.s_prime == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("derived constants at the reference tuples") {
  const DerivedParams d = derive(validate(5, 2, 1, 2));
  CHECK(d.r == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(d.rho_var == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(d.s_prime == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.K == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(d.sigma == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d.a == doctest::Approx(0.5));
  CHECK(d.b == doctest::Approx(2.0 / 3.0));
  CHECK(d.a_c == doctest::Approx(1.5));

  const DerivedParams e = derive(validate(5, 3, 0.5, 2));
  CHECK(e.r == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(e.K == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(e.sigma == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(e.inner_exp == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(e.decay_exp == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("classical Sobolev limit") {
  const DerivedParams d = derive_unchecked(CknParams{5, 2, 0, 0});
  CHECK(d.rho_var == 1.0);
  CHECK(d.s_prime == 0.0);
  CHECK(d.r == doctest::Approx(10.0 / 3.0));
}

TEST_CASE("invariants hold across the suite") {
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const DerivedParams d = derive(P);
    CHECK(d.rho_var > 1.0);
    CHECK(d.s_prime >= 0.0);
    CHECK(d.s_prime < P.p);
    CHECK(d.K > P.p);
    CHECK(d.r > P.p);
    CHECK(r_from_s_prime(P) == doctest::Approx(d.r).epsilon(1e-12));
    const GapCondition g = gap_condition(P);
    CHECK(g.holds());
    // Equivalent statement sigma^2 (N-1) > K - 1.
    CHECK(d.sigma * d.sigma * (P.N - 1) > d.K - 1.0);
  }
}

TEST_CASE("from_ab round trip") {
  const CknParams P = from_ab(5, 2, 0.5, 2.0 / 3.0);
  CHECK(P.N == 5);
  CHECK(P.mu == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(P.s == doctest::Approx(2.0).epsilon(1e-14));
  for (const CknParams& Q : suite()) {
    const DerivedParams d = derive(Q);
    const CknParams R = from_ab(Q.N, Q.p, d.a, d.b);
    CHECK(R.mu == doctest::Approx(Q.mu).epsilon(1e-12));
    CHECK(R.s == doctest::Approx(Q.s).epsilon(1e-12));
  }
  CHECK_THROWS_AS(from_ab(5, 2, -0.1, 0.0), OutOfRegion);
  const CknParams tiny = from_ab(5, 2, 1e-9, 1e-9);
  CHECK(tiny.mu == doctest::Approx(2e-9));
  CHECK(tiny.s < 1e-8);
}
