#include "ckn/manifold.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/functionals.hpp"

namespace ckn {

namespace {

constexpr double kGolden = 0.3819660112501051;  // 2 - phi

double signed_pow(double v, double e) {
  if (v == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(v), e), v);
}

// Objective ||u - c U_lambda||^p on a fixed rule, with the optimal c for each lambda.
class DistanceProblem {
 public:
  DistanceProblem(const RadialProfile& u, const CknParams& P, const RadialRule& rule)
      : P_(P), shape_(bubble_shape(P)), a_(scaling_exponent(P)), k_(tangent_scale(P)) {
    const auto radii = rule.radii();
    const auto weights = rule.weights();
    const double area = sphere_area(P.N);
    rho_.assign(radii.begin(), radii.end());
    omega_.resize(rho_.size());
    du_.resize(rho_.size());
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      omega_[i] = area * weights[i] * std::pow(rho_[i], P.N - 1.0 - P.mu);
      du_[i] = u.deriv(rho_[i]);
      u_norm_p_ += omega_[i] * std::pow(std::abs(du_[i]), P.p);
    }
    if (!(u_norm_p_ > 0.0)) throw Error(ErrorKind::ZeroFunction, "distance of the zero profile");
    g_.resize(rho_.size());
    dg_.resize(rho_.size());
  }

  double u_norm() const { return std::pow(u_norm_p_, 1.0 / P_.p); }

  struct Eval {
    double t = 0.0;
    double c = 0.0;
    double value = 0.0;  // ||u - c U_lambda||
  };

  Eval at(double t) {
    ++evaluations;
    load(t, false);
    Eval e;
    e.t = t;
    e.c = optimal_c();
    e.value = std::pow(objective(e.c), 1.0 / P_.p);
    return e;
  }

  // Pairing of |e|^{p-2} e' with (dU_lambda/dlambda)' at the optimal c; sign of d/dlambda.
  double lambda_pairing(double t, double* c_out = nullptr) {
    ++evaluations;
    load(t, true);
    const double c = optimal_c();
    if (c_out) *c_out = c;
    return pairing(c, dg_);
  }

  // Normalized first-order residuals at (c, t).
  std::pair<double, double> residuals(double t, double c) {
    load(t, true);
    const double scale = std::pow(u_norm_p_, (P_.p - 1.0) / P_.p);
    return {std::abs(pairing(c, g_)) / (scale * norm(g_)),
            std::abs(pairing(c, dg_)) / (scale * norm(dg_))};
  }

  int evaluations = 0;

 private:
  void load(double t, bool with_dlambda) {
    const double lambda = std::exp(t);
    const double pre = std::pow(lambda, a_ + 1.0);
    const double pre_d = std::pow(lambda, a_) * k_;
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      const double x = lambda * rho_[i];
      g_[i] = pre * shape_.deriv(x);
      if (with_dlambda) dg_[i] = pre_d * shape_.tangent_deriv(x);
    }
  }

  double objective(double c) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      sum += omega_[i] * std::pow(std::abs(du_[i] - c * g_[i]), P_.p);
    }
    return sum;
  }

  double pairing(double c, const std::vector<double>& h) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      sum += omega_[i] * signed_pow(du_[i] - c * g_[i], P_.p - 1.0) * h[i];
    }
    return sum;
  }

  double norm(const std::vector<double>& h) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < rho_.size(); ++i) sum += omega_[i] * std::pow(std::abs(h[i]), P_.p);
    return std::pow(sum, 1.0 / P_.p);
  }

  // f(c) = sum omega |e|^{p-2} e g (the objective's c-derivative is -p f) and -f'(c).
  std::pair<double, double> slope(double c) const {
    double f = 0.0, df = 0.0;
    const double p = P_.p;
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      const double e = du_[i] - c * g_[i];
      if (e == 0.0 || g_[i] == 0.0) continue;
      const double ae = std::abs(e);
      const double pw = std::exp((p - 1.0) * std::log(ae));
      const double wg = omega_[i] * g_[i];
      f += std::copysign(pw, e) * wg;
      df += (p - 1.0) * (pw / ae) * wg * g_[i];
    }
    return {f, df};
  }

  double optimal_c() const {
    double uu = 0.0, ug = 0.0, gg = 0.0;
    for (std::size_t i = 0; i < rho_.size(); ++i) {
      ug += omega_[i] * du_[i] * g_[i];
      gg += omega_[i] * g_[i] * g_[i];
      uu += omega_[i] * du_[i] * du_[i];
    }
    if (gg == 0.0) return 0.0;
    const double c0 = ug / gg;
    if (P_.p == 2.0) return c0;

    // f is strictly decreasing in c. Newton from the p = 2 value, bisecting once a bracket is
    // known and the step leaves it.
    const double scale = std::max(std::abs(c0), std::sqrt(uu / gg));
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double c = c0;
    for (int iter = 0; iter < 200; ++iter) {
      const auto [f, df] = slope(c);
      if (f == 0.0) return c;
      if (f > 0.0) lo = c; else hi = c;
      double next = (std::isfinite(df) && df > 0.0) ? c + f / df : c + (f > 0 ? scale : -scale);
      if (!(next > lo && next < hi)) {
        if (std::isfinite(lo) && std::isfinite(hi)) {
          next = 0.5 * (lo + hi);
        } else {
          next = std::isfinite(lo) ? c + std::max(scale, 2.0 * (c - lo) + scale)
                                   : c - std::max(scale, 2.0 * (hi - c) + scale);
        }
      }
      if (std::abs(next - c) <= 1e-14 * scale || hi - lo <= 1e-14 * scale) return next;
      c = next;
    }
    return c;
  }

  CknParams P_;
  BubbleShape shape_;
  double a_, k_;
  std::vector<double> rho_, omega_, du_, g_, dg_;
  double u_norm_p_ = 0.0;
};

struct Candidate {
  DistanceProblem::Eval best;
  double a = 0.0, b = 0.0;  // bracket in log lambda
  bool at_boundary = false;
};

// Downhill walk from t0 followed by a coarse golden section.
Candidate search_from(DistanceProblem& prob, double t0, double t_min, double t_max) {
  using Eval = DistanceProblem::Eval;
  auto clampt = [&](double t) { return std::clamp(t, t_min, t_max); };
  Eval mid = prob.at(clampt(t0));
  double step = 0.5;
  Eval right = prob.at(clampt(mid.t + step));
  Eval left = prob.at(clampt(mid.t - step));

  int guard = 0;
  while (guard++ < 200) {
    if (mid.value <= left.value && mid.value <= right.value) break;
    if (right.value < left.value) {
      if (right.t >= t_max) return {right, right.t, right.t, true};
      left = mid;
      mid = right;
      step *= 1.6;
      right = prob.at(clampt(mid.t + step));
    } else {
      if (left.t <= t_min) return {left, left.t, left.t, true};
      right = mid;
      mid = left;
      step *= 1.6;
      left = prob.at(clampt(mid.t - step));
    }
  }

  Candidate out{mid, left.t, right.t, false};
  while (out.b - out.a > 1e-4) {
    Eval& x = out.best;
    const bool upper = (out.b - x.t) > (x.t - out.a);
    const double t_new = upper ? x.t + kGolden * (out.b - x.t) : x.t - kGolden * (x.t - out.a);
    const Eval y = prob.at(t_new);
    if (y.value < x.value) {
      if (upper) out.a = x.t; else out.b = x.t;
      x = y;
    } else {
      if (upper) out.b = y.t; else out.a = y.t;
    }
  }
  out.at_boundary = out.best.t <= t_min + 1e-6 || out.best.t >= t_max - 1e-6;
  return out;
}

// The lambda-pairing is the derivative of the objective in log lambda up to a positive factor;
// solve for its sign change inside the bracket (Illinois false position), else finish golden.
void refine(DistanceProblem& prob, Candidate& cand) {
  double a = cand.a, b = cand.b;
  double fa = prob.lambda_pairing(a);
  double fb = prob.lambda_pairing(b);
  if (fa * fb < 0.0) {
    int side = 0;
    double t = cand.best.t;
    for (int iter = 0; iter < 100 && b - a > 1e-13; ++iter) {
      t = (a * fb - b * fa) / (fb - fa);
      const double ft = prob.lambda_pairing(t);
      if (ft == 0.0) {
        a = b = t;
        break;
      }
      if ((ft > 0.0) == (fb > 0.0)) {
        b = t;
        fb = ft;
        if (side == -1) fa *= 0.5;
        side = -1;
      } else {
        a = t;
        fa = ft;
        if (side == +1) fb *= 0.5;
        side = +1;
      }
    }
    const auto refined = prob.at(0.5 * (a + b));
    if (refined.value <= cand.best.value * (1.0 + 1e-12) + 1e-300) cand.best = refined;
    return;
  }
  while (b - a > 1e-9) {
    auto& x = cand.best;
    const bool upper = (b - x.t) > (x.t - a);
    const double t_new = upper ? x.t + kGolden * (b - x.t) : x.t - kGolden * (x.t - a);
    const auto y = prob.at(t_new);
    if (y.value < x.value) {
      if (upper) a = x.t; else b = x.t;
      x = y;
    } else {
      if (upper) b = y.t; else a = y.t;
    }
  }
}

}  // namespace

DistanceResult distance_to_manifold(const RadialProfile& u, const CknParams& P,
                                    const DistanceOptions& options) {
  const Support s = u.support();
  const double lo = std::max(s.lo, std::exp(-80.0));
  const double hi = std::min(s.hi, std::exp(80.0));
  return distance_to_manifold(u, P, RadialRule::log_uniform(lo, hi, 0.5), options);
}

DistanceResult distance_to_manifold(const RadialProfile& u, const CknParams& P,
                                    const RadialRule& rule, const DistanceOptions& options) {
  if (!(options.lambda_min > 0.0) || !(options.lambda_max > options.lambda_min)) {
    throw Error(ErrorKind::InvalidArgument, "lambda window must satisfy 0 < min < max");
  }
  DistanceProblem prob(u, P, rule);
  const double t_min = std::log(options.lambda_min);
  const double t_max = std::log(options.lambda_max);

  std::vector<Candidate> found;
  for (double start : options.starts) found.push_back(search_from(prob, std::log(start), t_min, t_max));

  const double tie = 1e-9 * prob.u_norm();
  Candidate* best = nullptr;
  for (Candidate& c : found) {
    if (c.at_boundary) continue;
    if (!best || c.best.value < best->best.value - tie ||
        (std::abs(c.best.value - best->best.value) <= tie && c.best.t < best->best.t)) {
      best = &c;
    }
  }
  if (!best) {
    const Candidate* any = &found.front();
    for (const Candidate& c : found) {
      if (c.best.value < any->best.value) any = &c;
    }
    throw OptimizerStall("minimizer escaped the lambda window", any->best.c,
                         std::exp(any->best.t), any->best.value);
  }

  refine(prob, *best);
  DistanceResult out;
  out.distance = best->best.value;
  out.point = {best->best.c, std::exp(best->best.t)};
  std::tie(out.residual_c, out.residual_lambda) = prob.residuals(best->best.t, best->best.c);
  out.evaluations = prob.evaluations;
  return out;
}

double tangent_pairing(const RadialProfile& f, const RadialProfile& g, const CknParams& P,
                       const Quadrature& quad) {
  const BubbleShape U = bubble_shape(P);
  const double r = derive_unchecked(P).r;
  const Support s = f.support().intersect(g.support());
  return quad.integrate(
      [&](double rho) {
        const double fg = f.value(rho) * g.value(rho);
        if (fg == 0.0) return 0.0;
        return std::exp((r - 2.0) * U.log_value(rho)) * fg;
      },
      P.s, P.N, s);
}

Projection project_tangent_orthogonal_report(const RadialProfile& w, const CknParams& P,
                                             const Quadrature& quad) {
  const RadialProfile U = bubble(P);
  const RadialProfile W = tangent_generator(P);
  Eigen::Matrix2d G;
  G(0, 0) = tangent_pairing(U, U, P, quad);
  G(0, 1) = G(1, 0) = tangent_pairing(U, W, P, quad);
  G(1, 1) = tangent_pairing(W, W, P, quad);
  const Eigen::Vector2d b(tangent_pairing(w, U, P, quad), tangent_pairing(w, W, P, quad));
  const double cond = std::abs(G.determinant()) / (G(0, 0) * G(1, 1));
  if (!(cond > 1e-12)) {
    std::ostringstream os;
    os << "normalized Gram determinant " << cond;
    throw Error(ErrorKind::SingularGram, os.str());
  }
  const Eigen::Vector2d x = G.ldlt().solve(b);
  Projection out{combination({{1.0, w}, {-x(0), U}, {-x(1), W}}), x(0), x(1), cond};
  return out;
}

RadialProfile project_tangent_orthogonal(const RadialProfile& w, const CknParams& P,
                                         const Quadrature& quad) {
  return project_tangent_orthogonal_report(w, P, quad).result;
}

RadialProfile normalized(const RadialProfile& w, const CknParams& P, const Quadrature& quad) {
  const double n = grad_norm_p(w, P, quad);
  if (!(n > 0.0)) throw Error(ErrorKind::ZeroFunction, "cannot normalize the zero profile");
  return (1.0 / n) * w;
}

}  // namespace ckn
