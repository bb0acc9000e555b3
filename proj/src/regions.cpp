#include "ckn/regions.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "ckn/errors.hpp"
#include "ckn/parallel.hpp"

namespace ckn {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::NotAchieved: return "NotAchieved";
    case Verdict::SymmetryBreaking: return "SymmetryBreaking";
    case Verdict::Symmetric: return "Symmetric";
    case Verdict::OpenConjectured: return "OpenConjectured";
    case Verdict::OutsideScope: return "OutsideScope";
  }
  return "?";
}

double critical_a(int N, double p) { return (N - p) / p; }

double b_fs(int N, double a) {
  if (!(a < 0.0)) throw Error(ErrorKind::DomainError, "b_FS is defined for a < 0");
  const double ac = (N - 2) / 2.0;
  const double t = ac - a;
  return N * t / (2.0 * std::sqrt(t * t + N - 1)) + a - ac;
}

CriterionSides criterion_sides(int N, double p, double a, double b) {
  const double ac = critical_a(N, p);
  const double e = 1.0 + a - b;
  CriterionSides out;
  out.L = e * (ac - a) / (ac - a + b);
  if (e <= 0.0) return out;  // X = inf: both radii vanish
  const double X = N / e;
  out.R1 = std::sqrt((N - 1) / (X - 1));
  out.R2 = X > 2.0 ? std::sqrt((N - 2) / (X - 2)) : std::numeric_limits<double>::infinity();
  return out;
}

bool in_strip(int N, double p, double a, double b) {
  return N >= 2 && p > 1.0 && p < N && a < critical_a(N, p) && a <= b && b <= a + 1.0;
}

RegionVerdict classify(int N, double p, double a, double b) {
  if (!in_strip(N, p, a, b)) return {};
  if (p == 2.0) {
    if (b == a + 1.0) return {Verdict::NotAchieved, "catrina_wang_upper_edge", {}};
    if (a < 0.0 && b == a) return {Verdict::NotAchieved, "catrina_wang_diagonal", {}};
    if (a < 0.0) {
      if (b < b_fs(N, a)) return {Verdict::SymmetryBreaking, "felli_schneider", {}};
      return {Verdict::Symmetric, "dolbeault_esteban_loss", {}};
    }
    return {Verdict::Symmetric, "dolbeault_esteban_loss", {}};
  }
  const CriterionSides c = criterion_sides(N, p, a, b);
  if (b == a + 1.0) return {Verdict::OpenConjectured, "upper_edge", c.R1 - c.L};
  if (a < b && c.L > c.R1) return {Verdict::SymmetryBreaking, "caldiroli_musina", {}};
  if (a > 0.0) return {Verdict::Symmetric, "lam_lu", {}};
  const bool guard = a == b || p < N / (2.0 * (1.0 + a - b));
  if (c.L <= c.R2) {
    if (guard) return {Verdict::Symmetric, "ciraolo_corso", {}};
    return {Verdict::OpenConjectured, "ciraolo_corso_guard_failed", c.R1 - c.L};
  }
  return {Verdict::OpenConjectured, "conjecture", c.R1 - c.L};
}

namespace {

// Upper end of {b : L - R(b) > 0} on [a, a+1): the last sign change on a fine scan, then
// bisection to machine precision.
template <class F>
std::optional<double> last_positive(double a, F&& g) {
  constexpr int kScan = 2000;
  const double lo = a, hi = a + 1.0;
  int last = -1;
  for (int i = 0; i < kScan; ++i) {
    const double b = lo + (hi - lo) * i / kScan;
    if (g(b) > 0.0) last = i;
  }
  if (last < 0) return std::nullopt;
  double x0 = lo + (hi - lo) * last / kScan;
  double x1 = lo + (hi - lo) * (last + 1) / kScan;
  for (int it = 0; it < 200 && x1 - x0 > 0.0; ++it) {
    const double mid = 0.5 * (x0 + x1);
    if (mid == x0 || mid == x1) break;
    if (g(mid) > 0.0) x0 = mid; else x1 = mid;
  }
  return 0.5 * (x0 + x1);
}

}  // namespace

std::optional<double> cm_boundary(int N, double p, double a) {
  if (!(a < critical_a(N, p))) return std::nullopt;
  return last_positive(a, [&](double b) {
    const CriterionSides c = criterion_sides(N, p, a, b);
    return c.L - c.R1;
  });
}

std::optional<double> cc_boundary(int N, double p, double a) {
  if (!(a < critical_a(N, p))) return std::nullopt;
  return last_positive(a, [&](double b) {
    const CriterionSides c = criterion_sides(N, p, a, b);
    return c.L - c.R2;
  });
}

RegionMap region_map(int N, double p, double a_lo, double a_hi, double b_lo, double b_hi,
                     double step, int jobs) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  RegionMap map;
  map.N = N;
  map.p = p;
  auto axis = [step](double lo, double hi) {
    std::vector<double> v;
    if (hi < lo) return v;
    const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < n; ++i) v.push_back(lo + i * step);
    return v;
  };
  const std::vector<double> as = axis(a_lo, a_hi), bs = axis(b_lo, b_hi);
  if (as.empty() || bs.empty()) return map;

  map.cells.resize(as.size() * bs.size());
  parallel_for(static_cast<int>(as.size()), jobs, [&](int i) {
    for (std::size_t j = 0; j < bs.size(); ++j) {
      map.cells[i * bs.size() + j] = {as[i], bs[j], classify(N, p, as[i], bs[j])};
    }
  });

  const double ac = critical_a(N, p);
  auto& diag = map.curves["diagonal"];
  auto& upper = map.curves["upper_edge"];
  auto& breaking = map.curves["breaking"];
  auto& cc = map.curves["ciraolo_corso"];
  auto& conj = map.curves["conjectured"];
  for (double a : as) {
    if (!(a < ac)) continue;
    diag.emplace_back(a, a);
    upper.emplace_back(a, a + 1.0);
    const auto cm = cm_boundary(N, p, a);
    if (p == 2.0) {
      if (a < 0.0) breaking.emplace_back(a, b_fs(N, a));
    } else if (cm) {
      breaking.emplace_back(a, *cm);
    }
    if (cm) conj.emplace_back(a, *cm);
    if (const auto c = cc_boundary(N, p, a)) cc.emplace_back(a, *c);
  }
  return map;
}

Topology p2_topology(const RegionMap& map) {
  Topology t;
  double column = std::numeric_limits<double>::quiet_NaN();
  bool seen_symmetric = false;
  for (const RegionCell& c : map.cells) {
    if (!(c.a == column)) {
      column = c.a;
      seen_symmetric = false;
    }
    switch (c.verdict.verdict) {
      case Verdict::SymmetryBreaking:
        ++t.breaking;
        if (seen_symmetric || !(c.a < 0.0) || !(c.b < b_fs(map.N, c.a))) ++t.misplaced;
        break;
      case Verdict::Symmetric:
        ++t.symmetric;
        seen_symmetric = true;
        if (c.a < 0.0 && c.b < b_fs(map.N, c.a)) ++t.misplaced;
        break;
      case Verdict::NotAchieved: ++t.not_achieved; break;
      case Verdict::OpenConjectured: ++t.open; break;
      case Verdict::OutsideScope: break;
    }
  }
  return t;
}

void write_region_csv(std::ostream& out, const RegionMap& map) {
  const auto old = out.precision(17);
  out << "a,b,verdict,provenance\n";
  for (const auto& c : map.cells) {
    out << c.a << ',' << c.b << ',' << to_string(c.verdict.verdict) << ','
        << c.verdict.provenance << '\n';
  }
  out.precision(old);
}

void write_curve_csv(std::ostream& out, const std::vector<std::pair<double, double>>& curve) {
  const auto old = out.precision(17);
  out << "a,b\n";
  for (const auto& [a, b] : curve) out << a << ',' << b << '\n';
  out.precision(old);
}

}  // namespace ckn
