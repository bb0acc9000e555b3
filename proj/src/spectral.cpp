#include "ckn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/parallel.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_abs_V_deriv_term(const SturmLiouvilleProblem& sl, double tau) {
  // (p-2) log|V'|, dropped at p = 2 so that V'(0) = 0 does not produce 0 * inf.
  if (sl.params.p == 2.0) return 0.0;
  return (sl.params.p - 2.0) * sl.V.log_abs_deriv(tau);
}

// Richardson table for an h^2 expansion; returns (value, |value - previous column|).
std::pair<double, double> richardson(const std::vector<double>& levels) {
  std::vector<double> col = levels;
  double prev = levels.back();
  for (std::size_t c = 1; c < levels.size(); ++c) {
    const double f = std::pow(4.0, static_cast<double>(c)) - 1.0;
    std::vector<double> next;
    for (std::size_t l = 1; l < col.size(); ++l) next.push_back(col[l] + (col[l] - col[l - 1]) / f);
    prev = col.back();
    col = std::move(next);
  }
  return {col.back(), std::abs(col.back() - prev)};
}

int count_sign_changes(const Eigen::VectorXd& x) {
  const double floor = 1e-8 * x.cwiseAbs().maxCoeff();
  int changes = 0;
  int sign = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) <= floor) continue;
    const int s = x[i] > 0 ? 1 : -1;
    if (sign != 0 && s != sign) ++changes;
    sign = s;
  }
  return changes;
}

double ratio_by_quadrature(const SturmLiouvilleProblem& sl,
                           const std::function<double(double)>& eta,
                           const std::function<double(double)>& deta) {
  QuadratureSpec spec;
  spec.rel_tol = 1e-12;
  auto term = [](double log_coeff, double v) {
    if (v == 0.0) return 0.0;
    return std::exp(log_coeff + 2.0 * std::log(std::abs(v)));
  };
  const double num =
      integrate_radial([&](double t) { return term(sl.log_P(t), deta(t)) + term(sl.log_Q(t), eta(t)); },
                       0.0, 1, spec, Normalization::Radial)
          .value;
  const double den =
      integrate_radial([&](double t) { return term(sl.log_W(t), eta(t)); }, 0.0, 1, spec,
                       Normalization::Radial)
          .value;
  if (!(den > 0.0)) throw Error(ErrorKind::DegenerateDenominator, "int W eta^2 = 0");
  return num / den;
}

}  // namespace

double SturmLiouvilleProblem::log_P(double tau) const {
  return std::log(params.p - 1.0) + log_abs_V_deriv_term(*this, tau) + (K - 1.0) * std::log(tau);
}

double SturmLiouvilleProblem::log_Q(double tau) const {
  if (k == 0) return kNegInf;
  return std::log(sigma * sigma * lambda_k) + log_abs_V_deriv_term(*this, tau) +
         (K - 3.0) * std::log(tau);
}

double SturmLiouvilleProblem::log_W(double tau) const {
  return (r - 2.0) * V.log_value(tau) + (K - 1.0) * std::log(tau);
}

double SturmLiouvilleProblem::P(double tau) const { return std::exp(log_P(tau)); }
double SturmLiouvilleProblem::Q(double tau) const { return k == 0 ? 0.0 : std::exp(log_Q(tau)); }
double SturmLiouvilleProblem::W(double tau) const { return std::exp(log_W(tau)); }

double SturmLiouvilleProblem::alpha_scale() const { return std::pow(sigma, params.p); }

SturmLiouvilleProblem assemble(const CknParams& params, int k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "mode index must be >= 0");
  const DerivedParams d = derive(params);
  SturmLiouvilleProblem sl;
  sl.params = params;
  sl.k = k;
  sl.lambda_k = static_cast<double>(k) * (params.N - 2 + k);
  sl.K = d.K;
  sl.sigma = d.sigma;
  sl.r = d.r;
  sl.V = transformed_shape(params);
  return sl;
}

long long harmonic_multiplicity(int N, int k) {
  if (k < 0 || N < 2) return 0;
  if (k == 0) return 1;
  if (N == 2) return 2;
  // C(N+k-1, k) - C(N+k-3, k-2)
  auto binom = [](long long n, long long m) -> long long {
    if (m < 0 || m > n) return 0;
    long long out = 1;
    for (long long i = 1; i <= m; ++i) out = out * (n - m + i) / i;
    return out;
  };
  return binom(N + k - 1, k) - binom(N + k - 3, k - 2);
}

DiscreteOperator discretize(const SturmLiouvilleProblem& sl, int n, const SpectralOptions& opt) {
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "grid needs at least 3 nodes");
  if (!(opt.tau_min > 0.0) || !(opt.tau_max > opt.tau_min)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < tau_min < tau_max");
  }
  const double t0 = std::log(opt.tau_min);
  const double h = (std::log(opt.tau_max) - t0) / (n - 1);

  DiscreteOperator op;
  op.tau.resize(n);
  op.log_link.resize(n - 1);
  op.log_q.resize(n);
  op.log_mass.resize(n);
  op.first = sl.k == 0 ? 0 : 1;
  op.last = n - 2;

  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * h;
    op.tau[i] = std::exp(t);
    const double hw = (i == 0 || i == n - 1) ? 0.5 * h : h;
    op.log_mass[i] = std::log(hw) + t + sl.log_W(op.tau[i]);
    op.log_q[i] = std::log(hw) + t + sl.log_Q(op.tau[i]);
  }
  for (int i = 0; i + 1 < n; ++i) {
    const double tm = t0 + (i + 0.5) * h;
    op.log_link[i] = sl.log_P(std::exp(tm)) - tm - std::log(h);
  }
  const double shift = op.log_mass.maxCoeff();
  op.log_mass.array() -= shift;
  op.log_q.array() -= shift;
  op.log_link.array() -= shift;

  op.left.setZero(n);
  op.right.setZero(n);
  op.q_ratio.setZero(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) op.left[i] = std::exp(op.log_link[i - 1] - op.log_mass[i]);
    if (i + 1 < n) op.right[i] = std::exp(op.log_link[i] - op.log_mass[i]);
    op.q_ratio[i] = std::exp(op.log_q[i] - op.log_mass[i]);
  }
  for (int i = op.first; i <= op.last; ++i) {
    if (!std::isfinite(op.left[i]) || !std::isfinite(op.right[i]) || !std::isfinite(op.q_ratio[i])) {
      std::ostringstream os;
      os << "coefficient ratio out of range at tau = " << op.tau[i];
      throw Error(ErrorKind::NonFinite, os.str());
    }
  }
  return op;
}

Eigen::VectorXd DiscreteOperator::mass() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(size());
  for (int i = first; i <= last; ++i) m[i] = std::exp(log_mass[i]);
  return m;
}

namespace {

// Pivots of A - alpha M divided by the node mass: dt_i = right_i + gt_i with
//   gt_i = q_i - alpha + left_i gt_{i-1} / dt_{i-1}.
// No two large terms are subtracted, so small eigenvalues of strongly graded operators keep
// their relative accuracy.
template <class Visit>
void pivots(const DiscreteOperator& op, double alpha, Visit&& visit) {
  double g_prev = 0.0, d_prev = 1.0;
  for (int i = op.first; i <= op.last; ++i) {
    double g = op.q_ratio[i] - alpha;
    g += i == op.first ? op.left[i] : op.left[i] * g_prev / d_prev;
    double d = op.right[i] + g;
    if (d == 0.0) d = -1e-300;
    visit(i, d);
    g_prev = d - op.right[i];
    d_prev = d;
  }
}

}  // namespace

int DiscreteOperator::count_below(double alpha) const {
  int count = 0;
  pivots(*this, alpha, [&](int, double d) { count += d < 0.0; });
  return count;
}

double DiscreteOperator::eigenvalue(int j) const {
  if (j < 0 || j >= active()) throw Error(ErrorKind::InvalidArgument, "eigenvalue index out of range");
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (count_below(hi) <= j) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 2000) throw NoConvergence("no upper bracket for eigenvalue", hi);
  }
  for (int iter = 0; iter < 400 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(mid) <= j) lo = mid; else hi = mid;
  }
  if (hi - lo > 1e-13 * hi) throw NoConvergence("eigenvalue bisection stalled", (hi - lo) / hi);
  return 0.5 * (lo + hi);
}

Eigen::VectorXd DiscreteOperator::eigenvector(double eigenvalue) const {
  const int n = size();
  // Slightly off the eigenvalue so the factorization stays regular; growth per sweep is
  // still ~1e10 against the neighbouring eigenvalues.
  const double alpha = eigenvalue * (1.0 - 1e-10);
  std::vector<double> d(n, 1.0);
  pivots(*this, alpha, [&](int i, double di) { d[i] = di; });

  // (A - alpha M) x = M y, divided row-wise by M.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = first; i <= last; ++i) x[i] = 1.0;
  Eigen::VectorXd z(n);
  for (int iter = 0; iter < 4; ++iter) {
    z.setZero();
    for (int i = first; i <= last; ++i) {
      z[i] = x[i];
      if (i > first) z[i] += left[i] * z[i - 1] / d[i - 1];
    }
    x.setZero();
    for (int i = last; i >= first; --i) {
      x[i] = z[i] / d[i];
      if (i < last) x[i] += right[i] * x[i + 1] / d[i];
    }
    const double big = x.cwiseAbs().maxCoeff();
    if (!(big > 0.0) || !std::isfinite(big)) throw NoConvergence("inverse iteration broke down", big);
    x /= big;
  }
  double norm2 = 0.0;
  for (int i = first; i <= last; ++i) {
    if (x[i] != 0.0) norm2 += std::exp(log_mass[i] + 2.0 * std::log(std::abs(x[i])));
  }
  x /= std::sqrt(norm2);
  const double floor = 1e-3 * x.cwiseAbs().maxCoeff();
  for (int i = first; i <= last; ++i) {
    if (std::abs(x[i]) > floor) {
      if (x[i] < 0.0) x = -x;
      break;
    }
  }
  return x;
}

double DiscreteOperator::energy(const Eigen::VectorXd& xin, const Eigen::VectorXd& yin) const {
  const int n = size();
  auto active_value = [&](const Eigen::VectorXd& v, int i) {
    return (i >= first && i <= last) ? v[i] : 0.0;
  };
  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double dx = active_value(xin, i + 1) - active_value(xin, i);
    const double dy = active_value(yin, i + 1) - active_value(yin, i);
    sum += std::exp(log_link[i]) * dx * dy;
  }
  for (int i = first; i <= last; ++i) sum += std::exp(log_q[i]) * xin[i] * yin[i];
  return sum;
}

double DiscreteOperator::rayleigh(const Eigen::VectorXd& x) const {
  double den = 0.0;
  for (int i = first; i <= last; ++i) den += std::exp(log_mass[i]) * x[i] * x[i];
  return energy(x, x) / den;
}

double Spectrum::rel_error(int j) const { return errors.at(j) / std::abs(alphas.at(j)); }

Spectrum eigen_solve(const SturmLiouvilleProblem& sl, int n_eigs, int grid_size,
                     const SpectralOptions& opt) {
  if (n_eigs < 1) throw Error(ErrorKind::InvalidArgument, "n_eigs must be >= 1");
  if (grid_size < 256) throw Error(ErrorKind::InvalidArgument, "grid_size must be >= 256");
  if (opt.refinements < 1) throw Error(ErrorKind::InvalidArgument, "need at least one refinement");

  Spectrum out;
  out.params = sl.params;
  out.k = sl.k;
  out.alpha_scale = sl.alpha_scale();
  out.tau_min = opt.tau_min;
  out.tau_max = opt.tau_max;

  DiscreteOperator finest;
  for (int level = 0; level <= opt.refinements; ++level) {
    const int n = (grid_size - 1) * (1 << level) + 1;
    out.grid_sizes.push_back(n);
    DiscreteOperator op = discretize(sl, n, opt);
    std::vector<double> alphas;
    for (int j = 0; j < n_eigs; ++j) alphas.push_back(op.eigenvalue(j));
    out.level_alphas.push_back(std::move(alphas));
    if (level == opt.refinements) finest = std::move(op);
  }

  for (int j = 0; j < n_eigs; ++j) {
    std::vector<double> seq;
    for (const auto& lv : out.level_alphas) seq.push_back(lv[j]);
    const auto [value, err] = richardson(seq);
    out.alphas.push_back(value);
    out.errors.push_back(err);
    out.xis.push_back(value / out.alpha_scale);
    if (err > opt.max_rel_error * std::abs(value)) {
      std::ostringstream os;
      os << "mode " << sl.k << " eigenvalue " << j << ": extrapolation error " << err / value;
      throw Error(ErrorKind::GridTooCoarse, os.str());
    }
    if (j > 0 && !(value > out.alphas[j - 1])) {
      throw NoConvergence("extrapolated eigenvalues are not increasing", value);
    }
  }

  out.tau = finest.tau;
  out.mass = finest.mass();
  out.eigenfunctions.resize(finest.size(), n_eigs);
  for (int j = 0; j < n_eigs; ++j) {
    const Eigen::VectorXd x = finest.eigenvector(out.level_alphas.back()[j]);
    out.eigenfunctions.col(j) = x;
    out.sign_changes.push_back(count_sign_changes(x));
    out.discrete_rayleigh.push_back(finest.rayleigh(x));
  }
  return out;
}

double eigenfunction_mismatch(const Spectrum& sp, int j, const Eigen::VectorXd& f) {
  const Eigen::ArrayXd m = sp.mass.array();
  const double nf = std::sqrt((m * f.array().square()).sum());
  if (!(nf > 0.0)) throw Error(ErrorKind::ZeroFunction, "comparison profile vanishes on the grid");
  const Eigen::ArrayXd g = f.array() / nf;
  const Eigen::ArrayXd x = sp.eigenfunctions.col(j).array();
  const double sign = (m * g * x).sum() >= 0.0 ? 1.0 : -1.0;
  return std::sqrt((m * (x - sign * g).square()).sum());
}

double rayleigh_quotient_V(const SturmLiouvilleProblem& sl) {
  return ratio_by_quadrature(sl, [&](double t) { return sl.V.value(t); },
                             [&](double t) { return sl.V.deriv(t); });
}

double rayleigh_quotient_eta0(const SturmLiouvilleProblem& sl) {
  return ratio_by_quadrature(sl, [&](double t) { return sl.V.tangent(t); },
                             [&](double t) { return sl.V.tangent_deriv(t); });
}

KnownModes verify_known_modes(const CknParams& params, int grid_size, int k_max,
                              const SpectralOptions& opt) {
  if (k_max < 1) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 1");
  const DerivedParams d = derive(params);
  KnownModes rep;
  rep.params = params;
  rep.modes.resize(k_max);
  std::vector<Spectrum> all(k_max + 1);
  parallel_for(k_max + 1, opt.jobs, [&](int k) {
    all[k] = eigen_solve(assemble(params, k), k == 0 ? 3 : 1, grid_size, opt);
  });
  rep.mode0 = std::move(all[0]);
  for (int k = 1; k <= k_max; ++k) rep.modes[k - 1] = std::move(all[k]);

  const double rm1 = d.r - 1.0;
  rep.xi1 = rep.mode0.xis[0];
  rep.xi2 = rep.mode0.xis[1];
  rep.xi3 = rep.mode0.xis[2];
  rep.xi1_error = std::abs(rep.xi1 - (params.p - 1.0));
  rep.xi2_error = std::abs(rep.xi2 - rm1);
  rep.separation = std::min(rep.xi2 - rep.xi1, rep.xi3 - rep.xi2) / rep.xi2;
  rep.simple = rep.separation > 1e-4 && rep.xi2_error <= 1e-3 * rm1;

  rep.min_margin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    const double xi = rep.modes[k - 1].xis[0];
    rep.lowest_xi.push_back(xi);
    if (xi - rm1 < rep.min_margin) {
      rep.min_margin = xi - rm1;
      rep.min_margin_mode = k;
    }
  }
  rep.gap_lhs = d.sigma * d.sigma * (params.N - 1);
  rep.gap_rhs = d.K - 1.0;
  rep.gap_precondition = gap_condition(params).holds();
  rep.nondegenerate = rep.simple && rep.min_margin > 0.0;
  return rep;
}

GapReport spectral_gap(const KnownModes& km) {
  const double rm1 = derive(km.params).r - 1.0;
  GapReport g;
  g.xi3_mode0 = km.xi3;
  g.lowest_xi = km.lowest_xi;
  double best = km.xi3 - rm1;
  g.mode = 0;
  for (std::size_t k = 0; k < km.lowest_xi.size(); ++k) {
    if (km.lowest_xi[k] - rm1 < best) {
      best = km.lowest_xi[k] - rm1;
      g.mode = static_cast<int>(k) + 1;
    }
  }
  g.tau_hat = 0.5 * best;
  if (!(g.tau_hat > 0.0)) throw NonPositiveGap(g.mode, g.tau_hat);
  return g;
}

GapReport spectral_gap(const CknParams& params, int k_max, int grid_size,
                       const SpectralOptions& opt) {
  return spectral_gap(verify_known_modes(params, grid_size, k_max, opt));
}

SecondSolution kernel_second_solution_checks(const CknParams& params, double B, double lo,
                                             double hi, int points) {
  const DerivedParams d = derive(params);
  const double p = params.p;
  const BubbleShape V = transformed_shape(params);
  const double gamma = p / (p - 1.0);
  const double t_start = 2.0 * V.tangent_zero();
  if (!(lo > t_start) || !(hi > lo) || points < 2) {
    throw Error(ErrorKind::InvalidArgument, "need 2 (p-1)^{1/gamma} < lo < hi and points >= 2");
  }

  SecondSolution out;
  out.B = B;
  out.tau = log_grid(lo, hi, points);
  const double K = d.K;
  auto log_dc = [&](double tau) {
    const double lt = std::log(tau);
    return K * (p - 2.0) / p * log1p_exp(gamma * lt) - 2.0 * std::log(std::abs(V.tangent(tau))) -
           (K - 1.0 / (p - 1.0)) * lt;
  };
  QuadratureSpec spec;
  spec.rel_tol = 1e-12;
  double c = 0.0;
  double prev = t_start;
  for (double tau : out.tau) {
    if (B != 0.0) {
      c += integrate_radial([&](double x) { return std::exp(log_dc(x)); }, 0.0, 1, spec,
                            Normalization::Radial, Support{prev, tau})
               .value;
    }
    prev = tau;
    const double e = V.tangent(tau);
    out.eta0.push_back(e);
    out.w.push_back(B * c * e);
  }
  out.asymptote = out.w.back();
  if (out.asymptote != 0.0) {
    for (double w : out.w) out.flatness = std::max(out.flatness, std::abs(w / out.asymptote - 1.0));
  }
  out.eta0_decay_observed = (std::log(std::abs(out.eta0.back())) - std::log(std::abs(out.eta0.front()))) /
                            (std::log(hi) - std::log(lo));
  out.eta0_decay_expected = -(K - p) / (p - 1.0);
  return out;
}

}  // namespace ckn
