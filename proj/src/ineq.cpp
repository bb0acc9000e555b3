#include "ckn/ineq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

#include "ckn/errors.hpp"
#include "ckn/parallel.hpp"
#include "ckn/stability.hpp"

namespace ckn {

namespace {

double signed_pow(double v, double e) { return std::copysign(std::pow(std::abs(v), e), v); }

Margin make_margin(double lhs, std::initializer_list<double> rhs_terms, bool upper) {
  double rhs = 0.0, scale = std::abs(lhs);
  for (double t : rhs_terms) {
    rhs += t;
    scale += std::abs(t);
  }
  return {upper ? rhs - lhs : lhs - rhs, scale};
}

struct Evaluation {
  bool violated = false;
  double worst = std::numeric_limits<double>::infinity();
  int violations = 0;
};

// Evaluates margin(i) for i in [0, n) in fixed chunks; the merge is order independent.
template <class F>
Evaluation evaluate(int n, int jobs, F&& margin_at) {
  constexpr int kChunk = 4096;
  const int chunks = (n + kChunk - 1) / kChunk;
  std::vector<Evaluation> parts(chunks);
  parallel_for(chunks, jobs, [&](int c) {
    Evaluation e;
    const int end = std::min(n, (c + 1) * kChunk);
    for (int i = c * kChunk; i < end; ++i) {
      const Margin m = margin_at(i);
      if (m.violated()) ++e.violations;
      if (m.scale > 0.0) e.worst = std::min(e.worst, m.value / m.scale);
    }
    e.violated = e.violations > 0;
    parts[c] = e;
  });
  Evaluation total;
  for (const auto& e : parts) {
    total.violations += e.violations;
    total.worst = std::min(total.worst, e.worst);
  }
  total.violated = total.violations > 0;
  if (!std::isfinite(total.worst)) total.worst = 0.0;
  return total;
}

struct SampleSet {
  ConstantKind kind;
  double parameter;
  double kappa;
  int N;
  std::vector<VectorPair> vectors;
  std::vector<std::pair<double, double>> scalars;

  int size() const {
    return kind == ConstantKind::C1 ? static_cast<int>(vectors.size())
                                    : static_cast<int>(scalars.size());
  }

  Margin at(int i, double constant) const {
    if (kind == ConstantKind::C1) {
      return check_vector_expansion(parameter, kappa, vectors[i].x, vectors[i].y, constant);
    }
    return check_scalar_expansion(parameter, kappa, scalars[i].first, scalars[i].second, constant,
                                  branch_for(parameter));
  }
};

SampleSet make_samples(ConstantKind kind, double parameter, double kappa, int samples,
                       std::uint64_t seed, int N) {
  if (!(parameter > 1.0)) throw Error(ErrorKind::InvalidArgument, "exponent must exceed 1");
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorKind::InvalidArgument, "kappa must lie in (0, 1)");
  SampleSet set{kind, parameter, kappa, N, {}, {}};
  if (kind == ConstantKind::C1) {
    set.vectors = sample_vector_pairs(N, samples, seed);
  } else {
    set.scalars = sample_scalar_pairs(samples, seed);
  }
  return set;
}

}  // namespace

Margin vector_expansion(double p, double kappa, double ax, double axy, double ay, double xy,
                        double C1) {
  const double lhs = std::pow(axy, p);
  const double t1 = std::pow(ax, p);
  const double t2 = ax == 0.0 ? 0.0 : p * std::pow(ax, p - 2.0) * xy;
  const double t3 = 0.5 * (1.0 - kappa) * p * expansion_bracket(p, ax, axy, ay);
  double T = std::pow(ay, p);
  if (p < 2.0 && ax > 0.0) T = std::min(T, std::pow(ax, p - 2.0) * ay * ay);
  return make_margin(lhs, {t1, t2, t3, C1 * T}, false);
}

Margin check_vector_expansion(double p, double kappa, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, double C1) {
  return vector_expansion(p, kappa, x.norm(), (x + y).norm(), y.norm(), x.dot(y), C1);
}

std::string to_string(ScalarBranch b) { return b == ScalarBranch::SmallR ? "small_r" : "large_r"; }

ScalarBranch branch_for(double r) { return r <= 2.0 ? ScalarBranch::SmallR : ScalarBranch::LargeR; }

Margin check_scalar_expansion(double r, double kappa, double a, double b, double C2,
                              ScalarBranch branch) {
  if (branch != branch_for(r)) {
    throw Error(ErrorKind::BranchMismatch,
                to_string(branch) + " expansion requested for r = " + std::to_string(r));
  }
  const double lhs = std::pow(std::abs(a + b), r);
  const double t1 = std::pow(std::abs(a), r);
  const double t2 = r * signed_pow(a, r - 1.0) * b;
  const double coeff = 0.5 * r * (r - 1.0) + kappa;
  if (branch == ScalarBranch::SmallR) {
    const double den = a * a + b * b;
    const double t3 = den == 0.0 ? 0.0 : coeff * std::pow(std::abs(a) + C2 * std::abs(b), r) * b * b / den;
    return make_margin(lhs, {t1, t2, t3}, true);
  }
  const double t3 = coeff * std::pow(std::abs(a), r - 2.0) * b * b;
  const double t4 = C2 * std::pow(std::abs(b), r);
  return make_margin(lhs, {t1, t2, t3, t4}, true);
}

std::vector<VectorPair> sample_vector_pairs(int N, int count, std::uint64_t seed) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto direction = [&] {
    Eigen::VectorXd v(N);
    for (int k = 0; k < N; ++k) v[k] = normal(gen);
    const double n = v.norm();
    return n > 0.0 ? Eigen::VectorXd(v / n) : Eigen::VectorXd(Eigen::VectorXd::Unit(N, 0));
  };
  std::vector<VectorPair> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    // Fixed number of draws per sample keeps the stream prefix-stable.
    const Eigen::VectorXd dx = direction();
    const Eigen::VectorXd dy = direction();
    const double mx = std::pow(10.0, -3.0 + 6.0 * unit(gen));
    const double my = std::pow(10.0, -3.0 + 6.0 * unit(gen));
    const double t = 3.0 * unit(gen);
    VectorPair s{mx * dx, my * dy};
    if (i % 4 == 2) {
      s.y = -t * s.x;
    } else if (i % 4 == 3 && N > 1) {
      Eigen::VectorXd perp = dy - dy.dot(dx) * dx;
      const double n = perp.norm();
      if (n > 0.0) s.y = my * perp / n;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::pair<double, double>> sample_scalar_pairs(int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, double>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double sa = unit(gen) < 0.5 ? -1.0 : 1.0;
    const double sb = unit(gen) < 0.5 ? -1.0 : 1.0;
    double a = sa * std::pow(10.0, -3.0 + 6.0 * unit(gen));
    double b = sb * std::pow(10.0, -3.0 + 6.0 * unit(gen));
    const double t = 3.0 * unit(gen);
    if (i % 4 == 2) {
      b = -t * a;
    } else if (i % 16 == 15) {
      a = 0.0;
    } else if (i % 4 == 3) {
      b = t * a;
    }
    out.emplace_back(a, b);
  }
  return out;
}

std::string to_string(ConstantKind k) { return k == ConstantKind::C1 ? "C1" : "C2"; }

ConstantSearch search_constant(ConstantKind kind, double parameter, double kappa, int samples,
                               std::uint64_t seed, int N, int jobs) {
  if (samples < 10000) throw Error(ErrorKind::InvalidArgument, "constant search needs >= 1e4 samples");
  const SampleSet set = make_samples(kind, parameter, kappa, samples, seed, N);
  auto feasible = [&](double c) {
    return !evaluate(set.size(), jobs, [&](int i) { return set.at(i, c); }).violated;
  };

  double value = 0.0;
  if (kind == ConstantKind::C1) {
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (feasible(hi) && ++guard < 60) {
      lo = hi;
      hi *= 2.0;
    }
    while (hi - lo > 1e-3) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid)) lo = mid; else hi = mid;
    }
    value = lo;
  } else {
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (!feasible(hi)) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 60) throw NoConvergence("no feasible C2 found", hi);
    }
    while (hi - lo > 1e-3) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid)) hi = mid; else lo = mid;
    }
    value = hi;
  }

  const Evaluation e = evaluate(set.size(), jobs, [&](int i) { return set.at(i, value); });
  ConstantSearch out;
  out.kind = kind;
  out.parameter = parameter;
  out.kappa = kappa;
  out.N = kind == ConstantKind::C1 ? N : 0;
  out.samples = samples;
  out.seed = seed;
  out.constant = value;
  out.worst_margin = e.worst;
  out.violations = e.violations;
  return out;
}

ConstantSearch count_violations(ConstantKind kind, double parameter, double kappa, double constant,
                                int samples, std::uint64_t seed, int N, int jobs) {
  const SampleSet set = make_samples(kind, parameter, kappa, samples, seed, N);
  const Evaluation e = evaluate(set.size(), jobs, [&](int i) { return set.at(i, constant); });
  ConstantSearch out;
  out.kind = kind;
  out.parameter = parameter;
  out.kappa = kappa;
  out.N = kind == ConstantKind::C1 ? N : 0;
  out.samples = samples;
  out.seed = seed;
  out.constant = constant;
  out.worst_margin = e.worst;
  out.violations = e.violations;
  return out;
}

}  // namespace ckn
