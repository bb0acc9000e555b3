#include <cmath>
#include <random>

#include "ckn/errors.hpp"
#include "ckn/functionals.hpp"
#include "ckn/manifold.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace ckn;
using namespace ckn::testing;

TEST_CASE("points on the manifold") {
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const RadialProfile u = 3.0 * bubble_scaled(P, 0.7);
    const DistanceResult d = distance_to_manifold(u, P);
    const double n = grad_norm_p(u, P);
    CHECK(d.distance <= 1e-7 * n);
    CHECK(d.point.c == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(d.point.lambda == doctest::Approx(0.7).epsilon(1e-7));
    const DistanceResult neg = distance_to_manifold(-bubble(P), P);
    CHECK(neg.point.c == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK(neg.distance <= 1e-7 * n);
  }
}

TEST_CASE("random manifold points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cdist(-5, 5), ldist(std::log(0.1), std::log(10.0));
  const CknParams P = suite()[1];
  for (int i = 0; i < 4; ++i) {
    const double c = cdist(rng);
    const double lambda = std::exp(ldist(rng));
    const RadialProfile u = c * bubble_scaled(P, lambda);
    const DistanceResult d = distance_to_manifold(u, P);
    CHECK(d.distance <= 1e-7 * grad_norm_p(u, P));
    CHECK(d.point.lambda == doctest::Approx(lambda).epsilon(1e-6));
  }
}

TEST_CASE("orthogonal perturbation at p = 2") {
  const CknParams P = kStar;
  const RadialProfile w = normalized(project_tangent_orthogonal(power_bump(4.0), P), P);
  CHECK(grad_norm_p(w, P) == doctest::Approx(1.0).epsilon(1e-12));
  for (double eps : {1e-2, 1e-3}) {
    const DistanceResult d = distance_to_manifold(bubble(P) + eps * w, P);
    CAPTURE(eps);
    CHECK(std::abs(d.distance - eps) <= 5 * eps * eps);
    CHECK(d.residual_c <= 1e-6);
    CHECK(d.residual_lambda <= 1e-6);
  }
}

TEST_CASE("first-order conditions hold at the returned point") {
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const RadialProfile w = normalized(project_tangent_orthogonal(modulated_bubble(P, 0.5, 0.9), P), P);
    const DistanceResult d = distance_to_manifold(bubble(P) + 0.05 * w, P);
    CHECK(d.residual_c <= 1e-6);
    CHECK(d.residual_lambda <= 1e-6);
    CHECK(d.distance > 0.0);
  }
}

TEST_CASE("window escape stalls") {
  const RadialProfile far = bubble_scaled(kStar, 1e7);
  try {
    distance_to_manifold(far, kStar);
    FAIL("expected OptimizerStall");
  } catch (const OptimizerStall& e) {
    CHECK(e.best_lambda() >= 1e3);
  }
  // Widening the window recovers it.
  DistanceOptions wide;
  wide.lambda_max = 1e9;
  wide.starts = {1e6};
  const DistanceResult d = distance_to_manifold(far, kStar, wide);
  CHECK(d.point.lambda == doctest::Approx(1e7).epsilon(1e-6));
}

TEST_CASE("projection") {
  for (const CknParams& P : suite()) {
    CAPTURE(describe(P));
    const RadialProfile U = bubble(P);
    const RadialProfile W = tangent_generator(P);
    const double uu = tangent_pairing(U, U, P);
    const double ww = tangent_pairing(W, W, P);
    // U and W0 are orthogonal in this pairing.
    CHECK(std::abs(tangent_pairing(U, W, P)) <= 1e-10 * std::sqrt(uu * ww));

    const Projection pu = project_tangent_orthogonal_report(U, P);
    CHECK(pu.alpha == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(pu.beta) <= 1e-10);
    for (double rho : {0.1, 1.0, 10.0}) CHECK(std::abs(pu.result.value(rho)) <= 1e-10 * U.value(0));
    const Projection pw = project_tangent_orthogonal_report(W, P);
    CHECK(pw.beta == doctest::Approx(1.0).epsilon(1e-12));

    const RadialProfile bump = P.p < 2 ? modulated_bubble(P, 1.5, 1.0) : power_bump(4.0);
    const RadialProfile v = project_tangent_orthogonal(bump, P);
    const double nb = std::sqrt(tangent_pairing(bump, bump, P));
    CHECK(std::abs(tangent_pairing(v, U, P)) <= 1e-9 * nb * std::sqrt(uu));
    CHECK(std::abs(tangent_pairing(v, W, P)) <= 1e-9 * nb * std::sqrt(ww));

    // Idempotence.
    const Projection twice = project_tangent_orthogonal_report(v, P);
    CHECK(std::abs(twice.alpha) <= 1e-9);
    CHECK(std::abs(twice.beta) <= 1e-9);

    // Taking w = U: int |x|^{-mu} |U'|^{p-2} U' v' = int |x|^{-s} U^{r-1} v = 0.
    const double r = derive(P).r;
    const BubbleShape shape = bubble_shape(P);
    const double lhs = integrate_radial(
                           [&](double rho) {
                             return -std::pow(std::abs(shape.deriv(rho)), P.p - 1) * v.deriv(rho);
                           },
                           P.mu, P.N, QuadratureSpec{})
                           .value;
    const double rhs = integrate_radial(
                           [&](double rho) { return std::pow(shape.value(rho), r - 1) * v.value(rho); },
                           P.s, P.N, QuadratureSpec{})
                           .value;
    const double scale = grad_norm_p(v, P) * std::pow(grad_norm_p(U, P), P.p - 1);
    CHECK(std::abs(lhs) <= 1e-8 * scale);
    CHECK(std::abs(rhs) <= 1e-8 * scale);
  }
}
