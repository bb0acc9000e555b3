#include "ckn/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ckn/errors.hpp"
#include "ckn/functionals.hpp"
#include "ckn/ineq.hpp"
#include "ckn/parallel.hpp"

namespace ckn {

void throw_zero_base(const char* where) {
  throw Error(ErrorKind::ZeroBase, std::string(where) + ": x = 0 on the branch dividing by |x|");
}

double omega_ratio(double p, double ax, double axy) {
  if (p == 2.0) return 1.0;
  if (p > 2.0) {
    if (ax < axy || ax == 0.0) return 1.0;
    return std::pow(axy / ax, p - 1.0);
  }
  if (axy <= ax) return 1.0;
  return axy / ((2.0 - p) * axy + (p - 1.0) * ax);
}

double expansion_bracket(double p, double ax, double axy, double ay) {
  if (ax == 0.0) return p == 2.0 ? ay * ay : 0.0;
  const double d = ax - axy;
  return std::pow(ax, p - 2.0) * (ay * ay + (p - 2.0) * omega_ratio(p, ax, axy) * d * d);
}

std::string to_string(GapVariant v) {
  switch (v) {
    case GapVariant::TwoSidedPGe2: return "two_sided_p_ge_2";
    case GapVariant::PLt2SmallR: return "p_lt_2_small_r";
    case GapVariant::PLt2LargeR: return "p_lt_2_large_r";
  }
  return "?";
}

GapVariant parse_gap_variant(const std::string& name) {
  for (GapVariant v : {GapVariant::TwoSidedPGe2, GapVariant::PLt2SmallR, GapVariant::PLt2LargeR}) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown gap variant '" + name + "'");
}

GapVariant natural_variant(const CknParams& P) {
  if (P.p >= 2.0) return GapVariant::TwoSidedPGe2;
  return derive(P).r <= 2.0 ? GapVariant::PLt2SmallR : GapVariant::PLt2LargeR;
}

GapForm gap_form(const RadialProfile& v, const CknParams& P, GapVariant variant, double tau_hat,
                 const GapFormOptions& opt, const Quadrature& quad) {
  if (variant != natural_variant(P)) {
    throw Error(ErrorKind::BranchMismatch,
                to_string(variant) + " does not apply to " + describe(P));
  }
  const DerivedParams d = derive(P);
  const double p = P.p, r = d.r;
  const RadialProfile U = bubble(P);
  const Support sup = support(v).intersect(support(U));

  GapForm out;
  out.tau_hat = tau_hat;
  out.v_norm = grad_norm_p(v, P, quad) / grad_norm_p(U, P, quad);
  if (out.v_norm > opt.smallness) {
    throw Error(ErrorKind::SmallnessViolation,
                "||v|| / ||U|| = " + std::to_string(out.v_norm) + " exceeds " +
                    std::to_string(opt.smallness));
  }
  if (out.v_norm == 0.0) return out;

  auto lhs_density = [&](double rho) {
    const double x = U.deriv(rho), y = v.deriv(rho);
    const double ax = std::abs(x), ay = std::abs(y);
    double f = expansion_bracket(p, ax, std::abs(x + y), ay);
    if (p < 2.0) {
      const double yp = std::pow(ay, p);
      f += opt.gamma0 * (ax > 0.0 ? std::min(yp, std::pow(ax, p - 2.0) * ay * ay) : yp);
    }
    return f;
  };
  auto rhs_density = [&](double rho) {
    const double u = U.value(rho), w = v.value(rho);
    if (variant == GapVariant::PLt2SmallR) {
      const double den = u * u + w * w;
      return den == 0.0 ? 0.0 : std::pow(u + opt.C * std::abs(w), r) / den * w * w;
    }
    return std::pow(u, r - 2.0) * w * w;
  };
  out.lhs = quad.integrate(lhs_density, P.mu, P.N, sup);
  out.rhs = (r - 1.0 + tau_hat) * quad.integrate(rhs_density, P.s, P.N, sup);
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi >= lo) || n < 1) {
    throw Error(ErrorKind::InvalidArgument, "log_spaced needs 0 < lo <= hi and n >= 1");
  }
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = hi;
    return out;
  }
  const double a = std::log(hi), b = std::log(lo);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.back() = lo;
  out.front() = hi;
  return out;
}

namespace {

// |x + y|^q - |x|^q without cancellation when |y| << |x|.
double power_difference(double x, double y, double q) {
  if (x != 0.0 && std::abs(y) < 0.5 * std::abs(x)) {
    return std::pow(std::abs(x), q) * std::expm1(q * std::log1p(y / x));
  }
  return std::pow(std::abs(x + y), q) - std::pow(std::abs(x), q);
}

void check_eps_grid(const std::vector<double>& eps) {
  if (eps.size() < 8) throw Error(ErrorKind::InvalidArgument, "eps grid needs at least 8 points");
  for (double e : eps) {
    if (!(e > 0.0 && e <= 0.3)) throw Error(ErrorKind::InvalidArgument, "eps outside (0, 0.3]");
  }
  const double step = std::log(eps[1] / eps[0]);
  if (step == 0.0) throw Error(ErrorKind::InvalidArgument, "eps grid has repeated values");
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (std::abs(std::log(eps[i] / eps[i - 1]) - step) > 1e-6 * std::abs(step)) {
      throw Error(ErrorKind::InvalidArgument, "eps grid is not log-spaced");
    }
  }
}

}  // namespace

double perturbation_deficit(const CknParams& P, const RadialProfile& w, double eps,
                            const Quadrature& quad) {
  const double p = P.p, r = derive(P).r;
  const RadialProfile U = bubble(P);
  const Support sup = support(w).intersect(support(U));
  const double G0 = grad_integral(U, P, quad);
  const double S0 = star_integral(U, P, quad);
  const double A = quad.integrate(
      [&](double rho) { return power_difference(U.deriv(rho), eps * w.deriv(rho), p); }, P.mu, P.N,
      sup);
  const double B = quad.integrate(
      [&](double rho) { return power_difference(U.value(rho), eps * w.value(rho), r); }, P.s, P.N,
      sup);
  return A - G0 * std::expm1(p / r * std::log1p(B / S0));
}

ScanReport stability_scan_report(const CknParams& P, const RadialProfile& w,
                                 const std::vector<double>& eps_grid, const ScanOptions& opt,
                                 const RadialRule& rule) {
  check_eps_grid(eps_grid);
  const double gamma = std::max(2.0, P.p);
  const Quadrature quad(rule);
  const RadialProfile U = bubble(P);

  ScanReport rep;
  rep.params = P;
  rep.direction = w.describe();
  rep.gamma_used = gamma;
  rep.points.resize(eps_grid.size());
  parallel_for(static_cast<int>(eps_grid.size()), opt.jobs, [&](int i) {
    const double eps = eps_grid[i];
    const RadialProfile u = U + eps * w;
    const DistanceResult dist = distance_to_manifold(u, P, opt.distance);
    ScanPoint& pt = rep.points[i];
    pt.eps = eps;
    pt.distance = dist.distance;
    pt.point = dist.point;
    pt.deficit = perturbation_deficit(P, w, eps, quad);
    pt.ratio_gamma = pt.deficit / std::pow(pt.distance, gamma);
    pt.ratio_p = pt.deficit / std::pow(pt.distance, P.p);
  });

  std::vector<const ScanPoint*> by_eps;
  for (const auto& pt : rep.points) by_eps.push_back(&pt);
  std::sort(by_eps.begin(), by_eps.end(),
            [](const ScanPoint* a, const ScanPoint* b) { return a->eps > b->eps; });

  rep.lower_bound_B = std::numeric_limits<double>::infinity();
  for (const auto* pt : by_eps) rep.lower_bound_B = std::min(rep.lower_bound_B, pt->ratio_gamma);
  rep.distances_monotone = true;
  rep.ratio_p_decreasing = true;
  for (std::size_t i = 1; i < by_eps.size(); ++i) {
    if (!(by_eps[i]->distance < by_eps[i - 1]->distance)) rep.distances_monotone = false;
    if (!(by_eps[i]->ratio_p < by_eps[i - 1]->ratio_p)) rep.ratio_p_decreasing = false;
  }

  // Least squares on the smallest-eps half.
  const std::size_t n = by_eps.size();
  const std::size_t m = (n + 1) / 2;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  int used = 0;
  for (std::size_t i = n - m; i < n; ++i) {
    const ScanPoint* pt = by_eps[i];
    if (!(pt->distance > 0.0 && pt->deficit > 0.0)) continue;
    const double x = std::log(pt->distance), y = std::log(pt->deficit);
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
    ++used;
  }
  rep.fit_points = used;
  if (used >= 2) {
    const double cxx = sxx - sx * sx / used;
    const double cyy = syy - sy * sy / used;
    const double cxy = sxy - sx * sy / used;
    rep.fitted_exponent = cxx > 0.0 ? cxy / cxx : 0.0;
    rep.correlation = cxx > 0.0 && cyy > 0.0 ? cxy / std::sqrt(cxx * cyy) : 0.0;
  }
  return rep;
}

ScanReport stability_scan(const CknParams& P, const RadialProfile& w,
                          const std::vector<double>& eps_grid, const ScanOptions& opt,
                          const RadialRule& rule) {
  ScanReport rep = stability_scan_report(P, w, eps_grid, opt, rule);
  if (std::abs(rep.correlation) < 0.99) {
    throw Error(ErrorKind::DegenerateFit,
                "log-log correlation " + std::to_string(rep.correlation) + " on " + rep.direction);
  }
  if (!(rep.lower_bound_B > 0.0)) {
    throw Error(ErrorKind::StabilityViolation,
                "min deficit / d^gamma = " + std::to_string(rep.lower_bound_B));
  }
  return rep;
}

std::vector<RadialProfile> scan_directions(const CknParams& P, const Quadrature& quad) {
  const BubbleShape U = bubble_shape(P);
  std::vector<RadialProfile> out;
  const double centers[] = {0.4, 1.5, 4.0};
  const double widths[] = {0.8, 1.2, 1.6};
  for (int i = 0; i < 3; ++i) {
    const double c = std::log(centers[i]), wd = widths[i];
    RadialProfile g = custom(
        [U, c, wd](double r) {
          const double z = (std::log(r) - c) / wd;
          return U.value(r) * std::exp(-0.5 * z * z);
        },
        [U, c, wd](double r) {
          const double z = (std::log(r) - c) / wd;
          const double e = std::exp(-0.5 * z * z);
          return U.deriv(r) * e - U.value(r) * e * z / (wd * r);
        },
        "U*gauss(" + std::to_string(centers[i]) + ")");
    out.push_back(normalized(project_tangent_orthogonal(g, P, quad), P, quad));
  }
  return out;
}

ExpansionReport expansion_check(const CknParams& P, double c, double lambda,
                                const RadialProfile& w, double d, double kappa, double C1,
                                double C2, const Quadrature& quad) {
  if (std::abs(d) > 0.1) {
    throw Error(ErrorKind::SmallnessViolation, "|d| = " + std::to_string(std::abs(d)) + " > 0.1");
  }
  const double p = P.p, r = derive(P).r;
  const ScalarBranch branch = branch_for(r);
  const RadialProfile Ul = bubble_scaled(P, lambda);
  const Support sup = support(w).intersect(support(Ul));

  ExpansionReport rep;
  auto grad = [&](double rho, int part) {
    const double x = c * Ul.deriv(rho), y = d * w.deriv(rho);
    const Margin m = vector_expansion(p, kappa, std::abs(x), std::abs(x + y), std::abs(y), x * y, C1);
    const double lhs = std::pow(std::abs(x + y), p);
    return part == 0 ? lhs : part == 1 ? lhs - m.value : m.value;
  };
  auto star = [&](double rho, int part) {
    const double a = c * Ul.value(rho), b = d * w.value(rho);
    const Margin m = check_scalar_expansion(r, kappa, a, b, C2, branch);
    const double lhs = std::pow(std::abs(a + b), r);
    return part == 0 ? lhs : part == 1 ? lhs + m.value : m.value;
  };
  rep.grad_p = quad.integrate([&](double x) { return grad(x, 0); }, P.mu, P.N, sup);
  rep.lower_bound = quad.integrate([&](double x) { return grad(x, 1); }, P.mu, P.N, sup);
  rep.margin_lower = quad.integrate([&](double x) { return grad(x, 2); }, P.mu, P.N, sup);
  rep.star_r = quad.integrate([&](double x) { return star(x, 0); }, P.s, P.N, sup);
  rep.upper_bound = quad.integrate([&](double x) { return star(x, 1); }, P.s, P.N, sup);
  rep.margin_upper = quad.integrate([&](double x) { return star(x, 2); }, P.s, P.N, sup);
  rep.pairing_grad = quad.integrate(
      [&](double x) {
        const double u = Ul.deriv(x);
        return u == 0.0 ? 0.0 : std::pow(std::abs(u), p - 2.0) * u * w.deriv(x);
      },
      P.mu, P.N, sup);
  rep.pairing_star = quad.integrate(
      [&](double x) { return std::pow(Ul.value(x), r - 1.0) * w.value(x); }, P.s, P.N, sup);
  return rep;
}

}  // namespace ckn
