#include "ckn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <sstream>
#include <tuple>

#include "ckn/errors.hpp"

namespace ckn {

namespace {

constexpr double kMaxAbsLogRadius = 700.0;
// Minimum log-radius extent scanned on each side before tail truncation is allowed.
constexpr double kMinExtent = 12.0;

struct Panel {
  double a = 0.0, b = 0.0;
  double left = 0.0, right = 0.0;  // GL estimates on the two halves
  double coarse = 0.0;             // GL estimate on [a, b]
  double mass = 0.0;               // GL estimate of int |f| on [a, b]
  double fine() const { return left + right; }
  double error() const { return std::abs(fine() - coarse); }
};

struct PanelOrder {
  bool operator()(const Panel& x, const Panel& y) const { return x.error() < y.error(); }
};

class LogIntegrand {
 public:
  LogIntegrand(const RadialFunction& f, double weight_exp, int N, double split, int order)
      : f_(f), power_(N - weight_exp), split_(split), rule_(gauss_legendre(order)) {}

  double at(double t) const {
    const double rho = split_ * std::exp(t);
    const double fv = f_(rho);
    if (fv == 0.0) return 0.0;
    const double v = fv * std::pow(rho, power_);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite integrand at rho = " << rho;
      throw Error(ErrorKind::SingularIntegrand, os.str());
    }
    return v;
  }

  double panel(double a, double b, double* mass = nullptr) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0, abs_sum = 0.0;
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
      const double v = rule_.weights[i] * at(mid + half * rule_.nodes[i]);
      sum += v;
      abs_sum += std::abs(v);
    }
    if (mass) *mass = std::abs(abs_sum * half);
    return sum * half;
  }

  Panel make(double a, double b, double coarse) const {
    const double m = 0.5 * (a + b);
    double ml = 0.0, mr = 0.0;
    const double l = panel(a, m, &ml);
    const double r = panel(m, b, &mr);
    return Panel{a, b, l, r, coarse, ml + mr};
  }

  Panel make(double a, double b) const { return make(a, b, panel(a, b)); }

 private:
  const RadialFunction& f_;
  double power_;
  double split_;
  const GaussLegendre& rule_;
};

// Panels covering [from, to) walking outward (direction = +1 or -1); stops when the tail is
// negligible or at the finite end.
// Errors below this multiple of eps * int |f| are roundoff, so integrals that cancel to ~0
// still converge.
constexpr double kRoundoffFloor = 64.0 * std::numeric_limits<double>::epsilon();

double target_error(const QuadratureSpec& spec, double value, double mass) {
  return std::max({spec.rel_tol * std::abs(value), spec.abs_tol, kRoundoffFloor * mass});
}

void cover_side(const LogIntegrand& g, double from, double end, int direction,
                const QuadratureSpec& spec, std::vector<Panel>& panels, double& running,
                double& mass) {
  const bool infinite = !std::isfinite(end);
  double t = from;
  int quiet = 0;
  int k = 0;
  while (true) {
    double width = std::min(16.0, 2.0 * std::pow(2.0, k / 2));
    ++k;
    double next = t + direction * width;
    bool last = false;
    if (!infinite && direction * (next - end) >= 0.0) {
      next = end;
      last = true;
    }
    if (std::abs(next) > kMaxAbsLogRadius) {
      throw NoConvergence("integrand tail not negligible within |log rho| <= 700",
                          std::abs(running));
    }
    double chunk = 0.0, chunk_mass = 0.0;
    // Chunks wider than 2 are split into unit-ish panels.
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(next - t) / 2.0)));
    for (int i = 0; i < pieces; ++i) {
      const double a = t + (next - t) * i / pieces;
      const double b = t + (next - t) * (i + 1) / pieces;
      Panel pnl = direction > 0 ? g.make(a, b) : g.make(b, a);
      chunk += pnl.fine();
      chunk_mass += pnl.mass;
      panels.push_back(pnl);
    }
    running += chunk;
    mass += chunk_mass;
    t = next;
    if (last) return;
    const double target = target_error(spec, running, mass);
    quiet = chunk_mass <= 1e-3 * target ? quiet + 1 : 0;
    if (quiet >= 2 && std::abs(t - from) >= kMinExtent) return;
  }
}

}  // namespace

void QuadratureSpec::check() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "quadrature tolerances must be positive");
  }
  if (panel_order < 4) throw Error(ErrorKind::InvalidArgument, "panel_order must be >= 4");
  if (!(split_point > 0.0)) throw Error(ErrorKind::InvalidArgument, "split_point must be > 0");
  if (max_panels < 1) throw Error(ErrorKind::InvalidArgument, "max_panels must be >= 1");
}

std::string QuadratureSpec::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "adaptive-gl" << panel_order << ":rel=" << rel_tol << ":abs=" << abs_tol
     << ":split=" << split_point << ":max=" << max_panels;
  return os.str();
}

Support Support::intersect(const Support& other) const {
  return {std::max(lo, other.lo), std::min(hi, other.hi)};
}

double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

const GaussLegendre& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GaussLegendre rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

QuadratureResult integrate_radial(const RadialFunction& f, double weight_exp, int N,
                                  const QuadratureSpec& spec, Normalization normalization,
                                  const Support& support) {
  spec.check();
  if (!(support.hi > support.lo)) return {};

  const double split = spec.split_point;
  const LogIntegrand g(f, weight_exp, N, split, spec.panel_order);
  const double t_lo = support.bounded_below() ? std::log(support.lo / split)
                                              : -std::numeric_limits<double>::infinity();
  const double t_hi = support.bounded_above() ? std::log(support.hi / split)
                                              : std::numeric_limits<double>::infinity();
  const double t0 = std::clamp(0.0, t_lo, t_hi);

  std::vector<Panel> panels;
  double running = 0.0, mass = 0.0;
  if (t_hi > t0) cover_side(g, t0, t_hi, +1, spec, panels, running, mass);
  if (t_lo < t0) cover_side(g, t0, t_lo, -1, spec, panels, running, mass);

  std::priority_queue<Panel, std::vector<Panel>, PanelOrder> queue(PanelOrder{},
                                                                    std::move(panels));
  auto totals = [&queue]() {
    // Deterministic order: the heap's underlying storage is iterated in a fixed sequence.
    double value = 0.0, error = 0.0, mass = 0.0;
    auto copy = queue;
    while (!copy.empty()) {
      value += copy.top().fine();
      error += copy.top().error();
      mass += copy.top().mass;
      copy.pop();
    }
    return std::tuple{value, error, mass};
  };

  auto [value, error, m_total] = totals();
  int count = static_cast<int>(queue.size());
  while (error > target_error(spec, value, m_total)) {
    if (count >= spec.max_panels) {
      throw NoConvergence("panel budget exhausted", error);
    }
    Panel worst = queue.top();
    queue.pop();
    const double m = 0.5 * (worst.a + worst.b);
    const Panel lhs = g.make(worst.a, m, worst.left);
    const Panel rhs = g.make(m, worst.b, worst.right);
    value += lhs.fine() + rhs.fine() - worst.fine();
    error += lhs.error() + rhs.error() - worst.error();
    queue.push(lhs);
    queue.push(rhs);
    ++count;
    if (count % 64 == 0) std::tie(value, error, m_total) = totals();
  }
  std::tie(value, error, m_total) = totals();

  const double scale = normalization == Normalization::FullSpace ? sphere_area(N) : 1.0;
  return {value * scale, error * scale, count};
}

RadialRule RadialRule::log_uniform(double rho_lo, double rho_hi, double panel_width, int order) {
  if (!(rho_lo > 0.0) || !(rho_hi > rho_lo)) {
    throw Error(ErrorKind::InvalidArgument, "RadialRule needs 0 < lo < hi");
  }
  const GaussLegendre& gl = gauss_legendre(order);
  const double t0 = std::log(rho_lo);
  const double t1 = std::log(rho_hi);
  const int panels = std::max(1, static_cast<int>(std::ceil((t1 - t0) / panel_width)));
  const double h = (t1 - t0) / panels;
  RadialRule rule;
  rule.lo_ = rho_lo;
  rule.hi_ = rho_hi;
  rule.radii_.reserve(static_cast<std::size_t>(panels) * order);
  rule.weights_.reserve(rule.radii_.capacity());
  for (int k = 0; k < panels; ++k) {
    const double mid = t0 + (k + 0.5) * h;
    for (int i = 0; i < order; ++i) {
      const double rho = std::exp(mid + 0.5 * h * gl.nodes[i]);
      rule.radii_.push_back(rho);
      rule.weights_.push_back(0.5 * h * gl.weights[i] * rho);
    }
  }
  return rule;
}

RadialRule RadialRule::standard(const Support& support) {
  const double lo = std::max(support.lo, std::exp(-80.0));
  const double hi = std::min(support.hi, std::exp(80.0));
  return log_uniform(lo, hi);
}

double RadialRule::integrate(const RadialFunction& f, double weight_exp, int N,
                             Normalization normalization) const {
  double sum = 0.0;
  const double power = N - 1.0 - weight_exp;
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    const double fv = f(radii_[i]);
    if (fv != 0.0) sum += weights_[i] * fv * std::pow(radii_[i], power);
  }
  if (!std::isfinite(sum)) throw Error(ErrorKind::SingularIntegrand, "non-finite rule sum");
  return normalization == Normalization::FullSpace ? sum * sphere_area(N) : sum;
}

double Quadrature::integrate(const RadialFunction& f, double weight_exp, int N,
                             const Support& support) const {
  if (!fixed_) return integrate_radial(f, weight_exp, N, spec_, Normalization::FullSpace, support)
      .value;
  if (support.lo <= rule_.support().lo && support.hi >= rule_.support().hi) {
    return rule_.integrate(f, weight_exp, N);
  }
  // Nodes outside the support are dropped; callers integrating sampled data build a rule on
  // the sample support instead.
  auto masked = [&](double rho) { return support.contains(rho) ? f(rho) : 0.0; };
  return rule_.integrate(masked, weight_exp, N);
}

std::string Quadrature::fingerprint() const {
  if (!fixed_) return spec_.fingerprint();
  std::ostringstream os;
  os.precision(17);
  os << "fixed-log-gl:n=" << rule_.size() << ":lo=" << rule_.support().lo
     << ":hi=" << rule_.support().hi;
  return os.str();
}

}  // namespace ckn
