#include <cmath>
#include <sstream>
#include <vector>

#include "ckn/errors.hpp"
#include "ckn/extremals.hpp"
#include "doctest.h"

using namespace ckn;

namespace {

const CknParams kStar{5, 2, 1, 2};

std::vector<CknParams> suite() {
  return {validate(5, 2, 1, 2), validate(5, 3, 0.5, 2), validate(4, 1.5, 0.5, 1),
          validate(4, 1.25, 0.5, 1.5)};
}

}  // namespace

TEST_CASE("normalization constant") {
  CHECK(normalization_constant(kStar) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(normalization_constant(CknParams{5, 3, 0.5, 2}) ==
        doctest::Approx(1.1905507889761496061).epsilon(1e-14));
  // mu = s = 0 gives the classical Sobolev expression.
  const int N = 6;
  const double p = 2.5;
  const double classical = std::pow(N * std::pow((N - p) / (p - 1), p - 1), (N - p) / (p * p));
  CHECK(normalization_constant(CknParams{N, p, 0, 0}) == doctest::Approx(classical).epsilon(1e-14));
}

TEST_CASE("bubble values at the reference tuple") {
  const RadialProfile U = bubble(kStar);
  CHECK(U.kind() == ProfileKind::Bubble);
  CHECK(eval(U, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(eval(U, 0.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(eval_deriv(U, 1.0) == doctest::Approx(-1.5).epsilon(1e-15));
  for (double rho : {1e-3, 0.37, 2.0, 45.0, 1e4}) {
    CHECK(eval(U, rho) == doctest::Approx(6.0 / std::pow(1 + rho, 2)).epsilon(1e-14));
    CHECK(eval_deriv(U, rho) == doctest::Approx(-12.0 / std::pow(1 + rho, 3)).epsilon(1e-14));
    CHECK(U.deriv2(rho) == doctest::Approx(36.0 / std::pow(1 + rho, 4)).epsilon(1e-13));
  }
}

TEST_CASE("scaled bubble") {
  for (const CknParams& P : suite()) {
    const RadialProfile U = bubble(P);
    const RadialProfile U1 = bubble_scaled(P, 1.0);
    const RadialProfile U2 = bubble_scaled(P, 2.0);
    const double a = (P.N - P.p - P.mu) / P.p;
    for (double rho : {0.01, 0.5, 3.0}) {
      CHECK(U1.value(rho) == U.value(rho));
      CHECK(U1.deriv(rho) == U.deriv(rho));
    }
    CHECK(U2.value(0.5) == doctest::Approx(std::pow(2.0, a) * U.value(1.0)).epsilon(1e-14));
    CHECK(U2.scale() == 2.0);
  }
  CHECK_THROWS_AS(bubble_scaled(kStar, 0.0), Error);
  try {
    bubble_scaled(kStar, -1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveScale);
  }
}

TEST_CASE("tangent generator") {
  const RadialProfile U = bubble(kStar);
  const RadialProfile W = tangent_generator(kStar);
  for (double rho : {0.01, 0.5, 1.0, 3.0, 100.0}) {
    CHECK(W.value(rho) == doctest::Approx((1 - rho) / std::pow(1 + rho, 3)).epsilon(1e-13));
    const double lhs = U.value(rho) + rho * U.deriv(rho);
    CHECK(lhs == doctest::Approx(6.0 * W.value(rho)).epsilon(1e-12));
  }
  CHECK(W.value(1.0) == doctest::Approx(0.0));
  for (const CknParams& P : suite()) {
    const DerivedParams d = derive(P);
    const double zero = std::pow(P.p - 1, (P.p - 1) / (P.p - P.s + P.mu));
    CHECK(bubble_shape(P).tangent_zero() == doctest::Approx(zero).epsilon(1e-14));
    CHECK(std::abs(tangent_generator(P).value(zero)) < 1e-13);
    // Exactly one sign change on a fine grid.
    int changes = 0;
    double prev = tangent_generator(P).value(1e-6);
    for (double rho : log_grid(1e-6, 1e6, 2000)) {
      const double v = tangent_generator(P).value(rho);
      if (v * prev < 0) ++changes;
      if (v != 0) prev = v;
    }
    CHECK(changes == 1);
    // (N-p-mu)/p U + rho U' = k W0.
    const double k = tangent_scale(P);
    const double a = (P.N - P.p - P.mu) / P.p;
    for (double rho : {0.05, 0.8, 7.0}) {
      const double lhs = a * bubble(P).value(rho) + rho * bubble(P).deriv(rho);
      CHECK(lhs == doctest::Approx(k * tangent_generator(P).value(rho)).epsilon(1e-12));
    }
    (void)d;
  }
}

TEST_CASE("tangent generator matches the dilation derivative") {
  for (const CknParams& P : suite()) {
    const double h = 1e-4;
    const RadialProfile Up = bubble_scaled(P, 1 + h);
    const RadialProfile Um = bubble_scaled(P, 1 - h);
    const RadialProfile W = tangent_generator(P);
    const RadialProfile dU = bubble_dlambda(P, 1.0);
    // Least-squares fit of the finite difference onto W0.
    std::vector<double> fd, w;
    for (double rho : log_grid(1e-2, 1e2, 41)) {
      fd.push_back((Up.value(rho) - Um.value(rho)) / (2 * h));
      w.push_back(W.value(rho));
      CHECK(dU.value(rho) == doctest::Approx(fd.back()).epsilon(1e-5).scale(1e-2));
    }
    double num = 0, den = 0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
      num += fd[i] * w[i];
      den += w[i] * w[i];
    }
    const double c = num / den;
    double err = 0, norm = 0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
      err += std::pow(fd[i] - c * w[i], 2);
      norm += fd[i] * fd[i];
    }
    CHECK(std::sqrt(err / norm) <= 1e-5);
    CHECK(c == doctest::Approx(tangent_scale(P)).epsilon(1e-6));
  }
}

TEST_CASE("transformed variables") {
  const RadialProfile V = transformed_bubble(kStar);
  const RadialProfile eta = kernel_eta0(kStar);
  for (double tau : {0.1, 1.0, 3.0}) {
    CHECK(V.value(tau) == doctest::Approx(6.0 / std::pow(1 + tau * tau, 2)).epsilon(1e-14));
    CHECK(eta.value(tau) ==
          doctest::Approx((1 - tau * tau) / std::pow(1 + tau * tau, 3)).epsilon(1e-13));
  }
  for (const CknParams& P : suite()) {
    const double sigma = derive(P).sigma;
    for (double tau : {0.02, 0.9, 11.0}) {
      const double rho = std::pow(tau, sigma);
      CHECK(transformed_bubble(P).value(tau) ==
            doctest::Approx(bubble(P).value(rho)).epsilon(1e-13));
      CHECK(kernel_eta0(P).value(tau) ==
            doctest::Approx(tangent_generator(P).value(rho)).epsilon(1e-12));
      CHECK(transformed_bubble(P).deriv(tau) ==
            doctest::Approx(bubble(P).deriv(rho) * sigma * rho / tau).epsilon(1e-12));
    }
  }
}

TEST_CASE("extreme radii stay finite") {
  for (const CknParams& P : suite()) {
    for (double rho : {1e-300, 1e-30, 1e30, 1e200, 1e300}) {
      CHECK(std::isfinite(bubble(P).value(rho)));
      CHECK(std::isfinite(bubble(P).deriv(rho)));
      CHECK(std::isfinite(tangent_generator(P).value(rho)));
      CHECK(std::isfinite(tangent_generator(P).deriv(rho)));
      CHECK(std::isfinite(transformed_bubble(P).deriv(rho)));
    }
  }
}

TEST_CASE("combination linearity") {
  const RadialProfile U = bubble(kStar);
  const RadialProfile c = combination({{2.0, U}, {-1.0, U}});
  CHECK(c.kind() == ProfileKind::Combination);
  for (double rho : {0.1, 1.0, 10.0}) {
    CHECK(eval(c, rho) == doctest::Approx(eval(U, rho)).epsilon(1e-15));
    CHECK((U - U).value(rho) == 0.0);
    CHECK((3.0 * U + (-U)).deriv(rho) == doctest::Approx(2 * U.deriv(rho)));
  }
  // Nested combinations are flattened.
  CHECK((2.0 * (U + U)).terms().size() == 2);
}

TEST_CASE("Euler-Lagrange residual") {
  for (double rho : log_grid(1e-3, 1e3, 60)) {
    const ElSides s = el_sides(kStar, rho);
    const double exact = 36.0 / (rho * rho * std::pow(1 + rho, 4));
    CHECK(s.lhs == doctest::Approx(exact).epsilon(1e-13));
    CHECK(s.rhs == doctest::Approx(exact).epsilon(1e-13));
    CHECK(s.relative() <= 1e-12);
  }
  // Frozen 40-digit oracle with numerically differentiated flux.
  const CknParams P{5, 3, 0.5, 2};
  const double lhs_oracle[] = {105.51892852587242277, 0.074746292754993696054,
                               1.8764213796692767399e-6};
  const double radii[] = {0.1, 1.0, 10.0};
  for (int i = 0; i < 3; ++i) {
    const ElSides s = el_sides(P, radii[i]);
    CHECK(s.lhs == doctest::Approx(lhs_oracle[i]).epsilon(1e-12));
    CHECK(s.relative() <= 1e-8);
  }
  for (const CknParams& Q : suite()) {
    for (double rho : log_grid(1e-3, 1e3, 60)) {
      CAPTURE(rho);
      CHECK(el_sides(Q, rho).relative() <= 1e-8);
    }
    CHECK(el_scaling(Q, log_grid(1e-3, 1e3, 60)).unit());
    // Generic jet path through the profile.
    for (double rho : log_grid(1e-3, 1e3, 25)) {
      CHECK(el_sides(bubble(Q), Q, rho).relative() <= 1e-8);
    }
  }
}

TEST_CASE("residual of a sampled zero profile") {
  const RadialProfile zero = sampled({0.5, 1.0, 2.0}, {0.0, 0.0, 0.0});
  CHECK(el_residual(zero, kStar, 1.0) == 0.0);
  CHECK(el_residual(zero, CknParams{4, 1.25, 0.5, 1.5}, 1.0) == 0.0);
}

TEST_CASE("sampled profiles") {
  const RadialProfile U = bubble(kStar);
  const auto grid = log_grid(1e-2, 1e2, 400);
  const RadialProfile S = sample(U, grid);
  CHECK(S.kind() == ProfileKind::Sampled);
  CHECK(S.support().lo == 1e-2);
  CHECK(S.support().hi == 1e2);
  for (double rho : {0.0123, 0.77, 5.5, 99.0}) {
    CHECK(S.value(rho) == doctest::Approx(U.value(rho)).epsilon(1e-6));
    CHECK(S.deriv(rho) == doctest::Approx(U.deriv(rho)).epsilon(1e-4));
  }
  CHECK_THROWS_AS(S.value(1e-3), Error);
  try {
    S.value(200.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfGrid);
  }
  // Monotone slopes keep monotone data monotone.
  const RadialProfile step = sampled({1, 2, 3, 4}, {0, 0, 1, 1});
  for (double rho = 1.0; rho < 4.0; rho += 0.01) {
    CHECK(step.value(rho) >= -1e-15);
    CHECK(step.value(rho) <= 1 + 1e-15);
    CHECK(step.deriv(rho) >= -1e-15);
  }
  CHECK_THROWS_AS(sampled({1, 1, 2}, {0, 0, 0}), Error);
  CHECK_THROWS_AS(sampled({1, 2}, {0, NAN}), Error);
}

TEST_CASE("profile CSV round trip") {
  const RadialProfile U = bubble(kStar);
  const auto grid = log_grid(1e-2, 1e2, 50);
  std::stringstream csv;
  write_profile_csv(csv, grid, U);
  const RadialProfile back = read_profile_csv(csv);
  REQUIRE(back.sampled() != nullptr);
  CHECK(back.sampled()->derivs_supplied);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(back.value(grid[i]) == U.value(grid[i]));
    CHECK(back.deriv(grid[i]) == doctest::Approx(U.deriv(grid[i])).epsilon(1e-14));
  }
  std::stringstream two("radius,value\n1,2\n2,1\n");
  const RadialProfile S = read_profile_csv(two);
  CHECK_FALSE(S.sampled()->derivs_supplied);
  std::stringstream bad("radius,value\n1,2\n2,x\n");
  CHECK_THROWS_AS(read_profile_csv(bad), Error);
}
