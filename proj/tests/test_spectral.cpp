#include "doctest.h"

#include <cmath>
#include <random>

#include "ckn/errors.hpp"
#include "ckn/spectral.hpp"
#include "test_support.hpp"

using namespace ckn;
using ckn::testing::kStar;
using ckn::testing::suite;

namespace {

Eigen::VectorXd sample(const Spectrum& sp, double (BubbleShape::*f)(double) const,
                       const BubbleShape& V) {
  Eigen::VectorXd out(sp.tau.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = (V.*f)(sp.tau[i]);
  return out;
}

}  // namespace

TEST_CASE("coefficients at the reference tuple") {
  const SturmLiouvilleProblem m0 = assemble(kStar, 0);
  CHECK(m0.K == doctest::Approx(6.0));
  CHECK(m0.sigma == doctest::Approx(2.0));
  CHECK(m0.alpha_scale() == doctest::Approx(4.0));
  for (double tau : {1e-3, 0.5, 1.0, 3.0, 1e3}) {
    CAPTURE(tau);
    CHECK(m0.Q(tau) == 0.0);
    CHECK(m0.P(tau) == doctest::Approx(std::pow(tau, 5)).epsilon(1e-13));
    const double V = 6.0 / ((1 + tau * tau) * (1 + tau * tau));
    CHECK(m0.V.value(tau) == doctest::Approx(V).epsilon(1e-14));
    CHECK(m0.W(tau) == doctest::Approx(V * std::pow(tau, 5)).epsilon(1e-13));
  }
  const SturmLiouvilleProblem m1 = assemble(kStar, 1);
  CHECK(m1.lambda_k == 4.0);
  for (double tau : {1e-2, 1.0, 7.0}) CHECK(m1.Q(tau) == doctest::Approx(16 * tau * tau * tau).epsilon(1e-13));

  for (const CknParams& P : suite()) CHECK(assemble(P, 0).Q(1.0) == 0.0);
  CHECK_THROWS_AS(assemble(kStar, -1), Error);
}

TEST_CASE("spherical harmonic multiplicities") {
  for (int k = 0; k < 6; ++k) CHECK(harmonic_multiplicity(3, k) == 2 * k + 1);
  CHECK(harmonic_multiplicity(2, 3) == 2);
  CHECK(harmonic_multiplicity(5, 1) == 5);
  CHECK(harmonic_multiplicity(5, 2) == 14);
  CHECK(harmonic_multiplicity(4, 2) == 9);
}

TEST_CASE("discrete operator is symmetric and graded entries stay finite") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  for (const CknParams& P : suite()) {
    for (int k : {0, 2}) {
      const DiscreteOperator op = discretize(assemble(P, k), 512);
      Eigen::VectorXd x(op.size()), y(op.size());
      for (int i = 0; i < op.size(); ++i) {
        x[i] = nd(gen);
        y[i] = nd(gen);
      }
      const double xy = op.energy(x, y);
      const double yx = op.energy(y, x);
      CHECK(std::abs(xy - yx) <= 1e-14 * std::sqrt(op.energy(x, x) * op.energy(y, y)));
      CHECK(op.left.allFinite());
      CHECK(op.right.allFinite());
      CHECK(op.first == (k == 0 ? 0 : 1));
      CHECK(op.last == op.size() - 2);
    }
  }
}

TEST_CASE("mode 0 reproduces p-1 and r-1 with the known eigenfunctions") {
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const double r = derive(P).r;
    const SturmLiouvilleProblem sl = assemble(P, 0);
    const Spectrum sp = eigen_solve(sl, 3, 4096);
    CHECK(sp.xis[0] == doctest::Approx(P.p - 1).epsilon(1e-3));
    CHECK(sp.xis[1] == doctest::Approx(r - 1).epsilon(1e-3));
    CHECK(sp.alphas[0] < sp.alphas[1]);
    CHECK(sp.alphas[1] < sp.alphas[2]);
    CHECK(sp.sign_changes == std::vector<int>{0, 1, 2});
    for (int j = 0; j < 3; ++j) {
      CHECK(sp.rel_error(j) <= 1e-3);
      CHECK(sp.discrete_rayleigh[j] == doctest::Approx(sp.level_alphas.back()[j]).epsilon(1e-9));
    }
    CHECK(eigenfunction_mismatch(sp, 0, sample(sp, &BubbleShape::value, sl.V)) <= 1e-2);
    CHECK(eigenfunction_mismatch(sp, 1, sample(sp, &BubbleShape::tangent, sl.V)) <= 1e-2);
    CHECK(sp.mass.size() == sp.tau.size());
  }
}

TEST_CASE("continuous Rayleigh quotients agree with the matrix eigenvalues") {
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const SturmLiouvilleProblem sl = assemble(P, 0);
    const Spectrum sp = eigen_solve(sl, 2, 4096);
    const double rv = rayleigh_quotient_V(sl);
    const double re = rayleigh_quotient_eta0(sl);
    CHECK(rv == doctest::Approx(sp.alphas[0]).epsilon(1e-6));
    CHECK(re == doctest::Approx(sp.alphas[1]).epsilon(1e-6));
    // Closed forms through alpha = sigma^p xi.
    CHECK(rv == doctest::Approx(sl.alpha(P.p - 1)).epsilon(1e-9));
    CHECK(re == doctest::Approx(sl.alpha(derive(P).r - 1)).epsilon(1e-9));
  }
}

TEST_CASE("eigenvalues are insensitive to widening the truncation") {
  SpectralOptions wide;
  wide.tau_min = 1e-6;
  wide.tau_max = 1e6;
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    for (int k : {0, 1}) {
      const Spectrum a = eigen_solve(assemble(P, k), 2, 1024);
      const Spectrum b = eigen_solve(assemble(P, k), 2, 1024, wide);
      for (int j = 0; j < 2; ++j) CHECK(b.alphas[j] == doctest::Approx(a.alphas[j]).epsilon(1e-4));
    }
  }
}

TEST_CASE("higher modes sit above r-1 and increase with k") {
  const Spectrum m1 = eigen_solve(assemble(kStar, 1), 1, 1024);
  CHECK(m1.alphas[0] > 8.0);
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    double previous = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const Spectrum sp = eigen_solve(assemble(P, k), 1, 1024);
      CHECK(sp.xis[0] > derive(P).r - 1);
      CHECK(sp.xis[0] > previous);
      CHECK(sp.sign_changes[0] == 0);
      previous = sp.xis[0];
    }
  }
}

TEST_CASE("known modes and non-degeneracy") {
  const KnownModes star = verify_known_modes(kStar, 1024);
  CHECK(star.xi1 == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(star.xi2 == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(star.nondegenerate);
  CHECK(star.gap_precondition);
  CHECK(star.gap_lhs == doctest::Approx(16.0));
  CHECK(star.gap_rhs == doctest::Approx(5.0));

  const KnownModes p3 = verify_known_modes(CknParams{5, 3, 0.5, 2}, 1024);
  CHECK(p3.xi1 == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(p3.xi2 == doctest::Approx(5.0).epsilon(1e-4));
  CHECK(p3.nondegenerate);
  CHECK(p3.min_margin > 0.0);

  for (const CknParams& P : suite()) {
    const DerivedParams d = derive(P);
    CHECK(d.sigma * d.sigma * (P.N - 1) > d.K - 1);
  }
}

TEST_CASE("spectral gap") {
  const KnownModes km = verify_known_modes(kStar, 1024);
  const GapReport g = spectral_gap(km);
  CHECK(g.tau_hat > 0.0);
  // Third radial eigenvalue 10/3 versus the first k = 1 eigenvalue.
  CHECK(g.mode == 0);
  CHECK(g.tau_hat == doctest::Approx(0.5 * (km.xi3 - 2.0)));

  double previous = std::numeric_limits<double>::infinity();
  for (int k_max = 1; k_max <= 3; ++k_max) {
    const double t = spectral_gap(kStar, k_max, 512).tau_hat;
    CHECK(t <= previous);
    previous = t;
  }

  KnownModes broken = km;
  broken.xi3 = 1.5;
  CHECK_THROWS_AS(spectral_gap(broken), NonPositiveGap);
  try {
    spectral_gap(broken);
  } catch (const NonPositiveGap& e) {
    CHECK(e.mode() == 0);
  }
}

TEST_CASE("solver argument and accuracy errors") {
  const SturmLiouvilleProblem sl = assemble(kStar, 0);
  CHECK_THROWS_AS(eigen_solve(sl, 0, 512), Error);
  CHECK_THROWS_AS(eigen_solve(sl, 1, 100), Error);
  SpectralOptions strict;
  strict.max_rel_error = 1e-16;
  try {
    eigen_solve(sl, 3, 256, strict);
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridTooCoarse);
  }
}

TEST_CASE("second kernel solution tends to a constant") {
  const SecondSolution w = kernel_second_solution_checks(kStar);
  // eta0 ~ -tau^{-4} and c ~ tau^4 / 4, so w -> -1/4.
  CHECK(w.asymptote == doctest::Approx(-0.25).epsilon(1e-2));
  CHECK(w.flatness <= 1e-2);
  CHECK(w.eta0_decay_expected == doctest::Approx(-4.0));
  CHECK(w.eta0_decay_observed == doctest::Approx(-4.0).epsilon(1e-3));

  const SecondSolution zero = kernel_second_solution_checks(kStar, 0.0);
  for (double v : zero.w) CHECK(v == 0.0);

  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const SecondSolution s = kernel_second_solution_checks(P);
    CHECK(std::abs(s.asymptote) > 0.0);
    CHECK(s.eta0_decay_observed == doctest::Approx(s.eta0_decay_expected).epsilon(2e-2));
  }
}
