#pragma once

#include <vector>

#include "ckn/extremals.hpp"
#include "ckn/params.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

struct ManifoldPoint {
  double c = 0.0;
  double lambda = 1.0;
};

struct DistanceOptions {
  double lambda_min = 1e-4;
  double lambda_max = 1e4;
  std::vector<double> starts = {0.25, 1.0, 4.0};
  /// Relative tolerance on the first-order conditions at the returned point.
  double first_order_tol = 1e-6;
};

struct DistanceResult {
  double distance = 0.0;
  ManifoldPoint point;
  /// Pairings of |e|^{p-2} e' (e = u - cU_lambda) against U_lambda' and (dU_lambda/dlambda)',
  /// divided by ||u||^{p-1} times the norm of the paired direction.
  double residual_c = 0.0;
  double residual_lambda = 0.0;
  int evaluations = 0;
};

/// inf over (c, lambda) of ||u - c U_lambda|| in D^{1,p}_mu. Integrals use a fixed radial rule
/// (log-uniform, panel width 0.5 on [e^-80, e^80], clipped to the support of u) so the objective is smooth in
/// (c, lambda). Throws OptimizerStall when every start runs into the lambda window.
DistanceResult distance_to_manifold(const RadialProfile& u, const CknParams& params,
                                    const DistanceOptions& options = {});
DistanceResult distance_to_manifold(const RadialProfile& u, const CknParams& params,
                                    const RadialRule& rule, const DistanceOptions& options = {});

/// <f, g> = int |x|^{-s} U^{r-2} f g.
double tangent_pairing(const RadialProfile& f, const RadialProfile& g, const CknParams& params,
                       const Quadrature& quad = QuadratureSpec{});

struct Projection {
  RadialProfile result;
  double alpha = 0.0;  // coefficient removed along U
  double beta = 0.0;   // coefficient removed along W0
  double gram_condition = 0.0;
};

/// w - alpha U - beta W0 with both pairings zero. Throws SingularGram.
Projection project_tangent_orthogonal_report(const RadialProfile& w, const CknParams& params,
                                             const Quadrature& quad = QuadratureSpec{});
RadialProfile project_tangent_orthogonal(const RadialProfile& w, const CknParams& params,
                                         const Quadrature& quad = QuadratureSpec{});

/// w / ||w|| in D^{1,p}_mu.
RadialProfile normalized(const RadialProfile& w, const CknParams& params,
                         const Quadrature& quad = QuadratureSpec{});

}  // namespace ckn
