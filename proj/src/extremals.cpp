#include "ckn/extremals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ckn/errors.hpp"

namespace ckn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1/(1+e^{-x}) and 1/(1+e^{x}) without cancellation.
double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
double logistic_complement(double x) { return logistic(-x); }

double signed_pow(double v, double e) {
  if (v == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(v), e), v);
}

}  // namespace

double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// ---------------------------------------------------------------------------------------------
// BubbleShape

double BubbleShape::log_value(double rho) const {
  if (rho == 0.0) return std::log(C);
  return std::log(C) - m * log1p_exp(beta * std::log(rho));
}

double BubbleShape::value(double rho) const {
  if (rho == 0.0) return C;
  return C * std::exp(-m * log1p_exp(beta * std::log(rho)));
}

double BubbleShape::log_abs_deriv(double rho) const {
  if (rho == 0.0) {
    if (beta > 1.0) return -kInf;
    if (beta == 1.0) return std::log(C * m * beta);
    return kInf;
  }
  const double lr = std::log(rho);
  return std::log(C * m * beta) + (beta - 1.0) * lr - (m + 1.0) * log1p_exp(beta * lr);
}

double BubbleShape::deriv(double rho) const {
  if (rho == 0.0) {
    if (beta > 1.0) return 0.0;
    if (beta == 1.0) return -C * m * beta;
    return -kInf;
  }
  return -std::exp(log_abs_deriv(rho));
}

double BubbleShape::deriv2(double rho) const {
  if (rho == 0.0) {
    if (beta > 2.0) return 0.0;
    if (beta == 2.0) return -C * m * beta * (beta - 1.0);
    if (beta == 1.0) return C * m * (m + 1.0);
    return beta > 1.0 ? -kInf : kInf;
  }
  const double lr = std::log(rho);
  const double x = beta * lr;
  const double bracket = (beta - 1.0) - (m + 1.0) * beta * logistic(x);
  return -C * m * beta * std::exp((beta - 2.0) * lr - (m + 1.0) * log1p_exp(x)) * bracket;
}

double BubbleShape::tangent(double rho) const {
  if (rho == 0.0) return p - 1.0;
  const double x = beta * std::log(rho);
  const double bracket = (p - 1.0) * logistic_complement(x) - logistic(x);
  return bracket * std::exp(-m * log1p_exp(x));
}

double BubbleShape::tangent_deriv(double rho) const {
  const double q = m + 1.0;
  if (rho == 0.0) {
    if (beta > 1.0) return 0.0;
    if (beta == 1.0) return -beta * (1.0 + q * (p - 1.0));
    return -kInf;
  }
  const double lr = std::log(rho);
  const double x = beta * lr;
  const double bracket = 1.0 + q * ((p - 1.0) * logistic_complement(x) - logistic(x));
  return -beta * std::exp((beta - 1.0) * lr - q * log1p_exp(x)) * bracket;
}

double BubbleShape::tangent_zero() const { return std::pow(p - 1.0, 1.0 / beta); }

double normalization_constant(const CknParams& P) {
  const double N = P.N, p = P.p, mu = P.mu, s = P.s;
  const double base = (N - s) * std::pow((N - p - mu) / (p - 1.0), p - 1.0);
  return std::pow(base, (N - p - mu) / (p * (p - s + mu)));
}

BubbleShape bubble_shape(const CknParams& P) {
  const DerivedParams d = derive_unchecked(P);
  return {normalization_constant(P), d.inner_exp, d.decay_exp, P.p};
}

BubbleShape transformed_shape(const CknParams& P) {
  const DerivedParams d = derive_unchecked(P);
  return {normalization_constant(P), P.p / (P.p - 1.0), d.decay_exp, P.p};
}

double scaling_exponent(const CknParams& P) { return (P.N - P.p - P.mu) / P.p; }

double tangent_scale(const CknParams& P) {
  return normalization_constant(P) * (P.N - P.p - P.mu) / (P.p * (P.p - 1.0));
}

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Bubble: return "Bubble";
    case ProfileKind::ScaledBubble: return "ScaledBubble";
    case ProfileKind::TangentGenerator: return "TangentGenerator";
    case ProfileKind::TransformedBubble: return "TransformedBubble";
    case ProfileKind::KernelEta0: return "KernelEta0";
    case ProfileKind::Sampled: return "Sampled";
    case ProfileKind::Combination: return "Combination";
    case ProfileKind::Custom: return "Custom";
  }
  return "?";
}

// ---------------------------------------------------------------------------------------------
// Nodes

namespace detail {

struct ProfileNode {
  virtual ~ProfileNode() = default;
  virtual ProfileKind kind() const = 0;
  virtual double value(double rho) const = 0;
  virtual double deriv(double rho) const = 0;
  virtual bool has_deriv2() const { return false; }
  virtual double deriv2(double) const {
    throw Error(ErrorKind::InvalidArgument,
                "second derivative unavailable for " + std::string(to_string(kind())));
  }
  virtual Support support() const { return {}; }
  virtual std::string describe() const { return std::string(to_string(kind())); }
  virtual double scale() const { return 1.0; }
};

}  // namespace detail

namespace {

using detail::ProfileNode;

class ClosedNode final : public ProfileNode {
 public:
  ClosedNode(ProfileKind kind, BubbleShape shape, bool tangent, double lambda, double weight)
      : kind_(kind), shape_(shape), tangent_(tangent), lambda_(lambda), weight_(weight),
        prefactor_(std::pow(lambda, weight)) {}

  ProfileKind kind() const override { return kind_; }
  double value(double rho) const override {
    const double x = lambda_ * rho;
    return prefactor_ * (tangent_ ? shape_.tangent(x) : shape_.value(x));
  }
  double deriv(double rho) const override {
    const double x = lambda_ * rho;
    return prefactor_ * lambda_ * (tangent_ ? shape_.tangent_deriv(x) : shape_.deriv(x));
  }
  bool has_deriv2() const override { return !tangent_; }
  double deriv2(double rho) const override {
    if (tangent_) return ProfileNode::deriv2(rho);
    return prefactor_ * lambda_ * lambda_ * shape_.deriv2(lambda_ * rho);
  }
  std::string describe() const override {
    std::ostringstream os;
    os << to_string(kind_);
    if (lambda_ != 1.0) os << "(lambda=" << lambda_ << ")";
    return os.str();
  }
  double scale() const override { return lambda_; }

 private:
  ProfileKind kind_;
  BubbleShape shape_;
  bool tangent_;
  double lambda_;
  double weight_;
  double prefactor_;
};

class SampledNode final : public ProfileNode {
 public:
  explicit SampledNode(SampledData data) : data_(std::move(data)) {}

  ProfileKind kind() const override { return ProfileKind::Sampled; }
  double value(double rho) const override { return hermite(rho, 0); }
  double deriv(double rho) const override { return hermite(rho, 1); }
  bool has_deriv2() const override { return true; }
  double deriv2(double rho) const override { return hermite(rho, 2); }
  Support support() const override { return {data_.radii.front(), data_.radii.back()}; }
  std::string describe() const override {
    std::ostringstream os;
    os << "Sampled(n=" << data_.radii.size() << ", [" << data_.radii.front() << ", "
       << data_.radii.back() << "])";
    return os.str();
  }
  const SampledData& data() const { return data_; }

 private:
  double hermite(double rho, int order) const {
    const auto& x = data_.radii;
    if (!(rho >= x.front() && rho <= x.back())) {
      std::ostringstream os;
      os << "rho = " << rho << " outside [" << x.front() << ", " << x.back() << "]";
      throw Error(ErrorKind::OutOfGrid, os.str());
    }
    std::size_t i = std::upper_bound(x.begin(), x.end(), rho) - x.begin();
    i = std::clamp<std::size_t>(i, 1, x.size() - 1) - 1;
    const double h = x[i + 1] - x[i];
    const double t = (rho - x[i]) / h;
    const double y0 = data_.values[i], y1 = data_.values[i + 1];
    const double d0 = data_.derivs[i] * h, d1 = data_.derivs[i + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    switch (order) {
      case 0:
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * y1 +
               (t3 - t2) * d1;
      case 1:
        return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * d0 + (-6 * t2 + 6 * t) * y1 +
                (3 * t2 - 2 * t) * d1) / h;
      default:
        return ((12 * t - 6) * y0 + (6 * t - 4) * d0 + (-12 * t + 6) * y1 + (6 * t - 2) * d1) /
               (h * h);
    }
  }

  SampledData data_;
};

class CombinationNode final : public ProfileNode {
 public:
  explicit CombinationNode(std::vector<std::pair<double, RadialProfile>> terms)
      : terms_(std::move(terms)) {}

  ProfileKind kind() const override { return ProfileKind::Combination; }
  double value(double rho) const override {
    double sum = 0.0;
    for (const auto& [c, u] : terms_) sum += c * u.value(rho);
    return sum;
  }
  double deriv(double rho) const override {
    double sum = 0.0;
    for (const auto& [c, u] : terms_) sum += c * u.deriv(rho);
    return sum;
  }
  bool has_deriv2() const override {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const auto& t) { return t.second.has_deriv2(); });
  }
  double deriv2(double rho) const override {
    double sum = 0.0;
    for (const auto& [c, u] : terms_) sum += c * u.deriv2(rho);
    return sum;
  }
  Support support() const override {
    Support s;
    for (const auto& [c, u] : terms_) s = s.intersect(u.support());
    return s;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "Combination[";
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (i) os << ", ";
      os << terms_[i].first << "*" << terms_[i].second.describe();
    }
    os << "]";
    return os.str();
  }
  const std::vector<std::pair<double, RadialProfile>>& terms() const { return terms_; }

 private:
  std::vector<std::pair<double, RadialProfile>> terms_;
};

class CustomNode final : public ProfileNode {
 public:
  CustomNode(std::function<double(double)> f, std::function<double(double)> df,
             std::function<double(double)> d2f, std::string label, Support support)
      : f_(std::move(f)), df_(std::move(df)), d2f_(std::move(d2f)), label_(std::move(label)),
        support_(support) {}

  ProfileKind kind() const override { return ProfileKind::Custom; }
  double value(double rho) const override { return f_(rho); }
  double deriv(double rho) const override { return df_(rho); }
  bool has_deriv2() const override { return static_cast<bool>(d2f_); }
  double deriv2(double rho) const override {
    if (!d2f_) return ProfileNode::deriv2(rho);
    return d2f_(rho);
  }
  Support support() const override { return support_; }
  std::string describe() const override { return label_; }

 private:
  std::function<double(double)> f_, df_, d2f_;
  std::string label_;
  Support support_;
};

const std::vector<std::pair<double, RadialProfile>> kNoTerms;

void check_scale(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    std::ostringstream os;
    os << "lambda = " << lambda;
    throw Error(ErrorKind::NonPositiveScale, os.str());
  }
}

std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  d.front() = delta.front();
  d.back() = delta.back();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    const double w1 = 2 * h[i] + h[i - 1];
    const double w2 = h[i] + 2 * h[i - 1];
    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// RadialProfile

RadialProfile::RadialProfile(std::shared_ptr<const detail::ProfileNode> node)
    : node_(std::move(node)) {}

ProfileKind RadialProfile::kind() const { return node_->kind(); }
double RadialProfile::value(double rho) const { return node_->value(rho); }
double RadialProfile::deriv(double rho) const { return node_->deriv(rho); }
double RadialProfile::deriv2(double rho) const { return node_->deriv2(rho); }
bool RadialProfile::has_deriv2() const { return node_->has_deriv2(); }
Support RadialProfile::support() const { return node_->support(); }
std::string RadialProfile::describe() const { return node_->describe(); }
double RadialProfile::scale() const { return node_->scale(); }

const SampledData* RadialProfile::sampled() const {
  auto* s = dynamic_cast<const SampledNode*>(node_.get());
  return s ? &s->data() : nullptr;
}

const std::vector<std::pair<double, RadialProfile>>& RadialProfile::terms() const {
  auto* c = dynamic_cast<const CombinationNode*>(node_.get());
  return c ? c->terms() : kNoTerms;
}

RadialProfile bubble(const CknParams& P) {
  return RadialProfile(std::make_shared<ClosedNode>(ProfileKind::Bubble, bubble_shape(P), false,
                                                    1.0, scaling_exponent(P)));
}

RadialProfile bubble_scaled(const CknParams& P, double lambda) {
  check_scale(lambda);
  const auto kind = lambda == 1.0 ? ProfileKind::Bubble : ProfileKind::ScaledBubble;
  return RadialProfile(
      std::make_shared<ClosedNode>(kind, bubble_shape(P), false, lambda, scaling_exponent(P)));
}

RadialProfile tangent_generator(const CknParams& P) { return tangent_scaled(P, 1.0); }

RadialProfile tangent_scaled(const CknParams& P, double lambda) {
  check_scale(lambda);
  return RadialProfile(std::make_shared<ClosedNode>(ProfileKind::TangentGenerator,
                                                    bubble_shape(P), true, lambda,
                                                    scaling_exponent(P)));
}

RadialProfile bubble_dlambda(const CknParams& P, double lambda) {
  return combination({{tangent_scale(P) / lambda, tangent_scaled(P, lambda)}});
}

RadialProfile transformed_bubble(const CknParams& P) {
  return RadialProfile(std::make_shared<ClosedNode>(ProfileKind::TransformedBubble,
                                                    transformed_shape(P), false, 1.0, 0.0));
}

RadialProfile kernel_eta0(const CknParams& P) {
  return RadialProfile(std::make_shared<ClosedNode>(ProfileKind::KernelEta0,
                                                    transformed_shape(P), true, 1.0, 0.0));
}

RadialProfile sampled(std::vector<double> radii, std::vector<double> values,
                      std::vector<double> derivs) {
  if (radii.size() < 2 || values.size() != radii.size()) {
    throw Error(ErrorKind::InvalidArgument, "sampled profile needs >= 2 matching samples");
  }
  if (!derivs.empty() && derivs.size() != radii.size()) {
    throw Error(ErrorKind::InvalidArgument, "derivative column length mismatch");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(radii[i]) || !std::isfinite(values[i]) ||
        (!derivs.empty() && !std::isfinite(derivs[i]))) {
      throw Error(ErrorKind::NonFinite, "sample " + std::to_string(i));
    }
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw Error(ErrorKind::InvalidArgument, "radii must be positive and strictly increasing");
    }
  }
  SampledData data;
  data.derivs_supplied = !derivs.empty();
  data.derivs = data.derivs_supplied ? std::move(derivs) : monotone_slopes(radii, values);
  data.radii = std::move(radii);
  data.values = std::move(values);
  return RadialProfile(std::make_shared<SampledNode>(std::move(data)));
}

RadialProfile sample(const RadialProfile& u, const std::vector<double>& radii) {
  std::vector<double> values, derivs;
  values.reserve(radii.size());
  derivs.reserve(radii.size());
  for (double r : radii) {
    values.push_back(u.value(r));
    derivs.push_back(u.deriv(r));
  }
  return sampled(radii, std::move(values), std::move(derivs));
}

RadialProfile combination(std::vector<std::pair<double, RadialProfile>> terms) {
  std::vector<std::pair<double, RadialProfile>> flat;
  for (auto& [c, u] : terms) {
    if (u.kind() == ProfileKind::Combination) {
      for (const auto& [ci, ui] : u.terms()) flat.emplace_back(c * ci, ui);
    } else {
      flat.emplace_back(c, std::move(u));
    }
  }
  return RadialProfile(std::make_shared<CombinationNode>(std::move(flat)));
}

RadialProfile custom(std::function<double(double)> f, std::function<double(double)> df,
                     std::string label, Support support, std::function<double(double)> d2f) {
  return RadialProfile(std::make_shared<CustomNode>(std::move(f), std::move(df), std::move(d2f),
                                                    std::move(label), support));
}

RadialProfile operator*(double c, const RadialProfile& u) { return combination({{c, u}}); }
RadialProfile operator+(const RadialProfile& u, const RadialProfile& v) {
  return combination({{1.0, u}, {1.0, v}});
}
RadialProfile operator-(const RadialProfile& u, const RadialProfile& v) {
  return combination({{1.0, u}, {-1.0, v}});
}
RadialProfile operator-(const RadialProfile& u) { return combination({{-1.0, u}}); }

double eval(const RadialProfile& profile, double rho) { return profile.value(rho); }
double eval_deriv(const RadialProfile& profile, double rho) { return profile.deriv(rho); }
Support support(const RadialProfile& profile) { return profile.support(); }

// ---------------------------------------------------------------------------------------------
// Euler-Lagrange

namespace {

ElSides el_from_jet(const CknParams& P, double rho, double u, double u1, double u2) {
  const DerivedParams d = derive_unchecked(P);
  const double p = P.p;
  const double flux = signed_pow(u1, p - 1.0);  // |u'|^{p-2} u'
  double flux_deriv;                            // (p-1)|u'|^{p-2} u''
  if (u1 != 0.0) {
    flux_deriv = (p - 1.0) * std::pow(std::abs(u1), p - 2.0) * u2;
  } else if (u2 == 0.0 || p > 2.0) {
    flux_deriv = 0.0;
  } else if (p == 2.0) {
    flux_deriv = u2;
  } else {
    flux_deriv = std::copysign(kInf, u2);
  }
  ElSides sides;
  sides.lhs = -((P.N - 1.0 - P.mu) * std::pow(rho, -1.0 - P.mu) * flux +
                std::pow(rho, -P.mu) * flux_deriv);
  sides.rhs = std::pow(rho, -P.s) * signed_pow(u, d.r - 1.0);
  return sides;
}

}  // namespace

double ElSides::relative() const {
  const double diff = std::abs(lhs - rhs);
  return rhs == 0.0 ? diff : diff / std::abs(rhs);
}

ElSides el_sides(const CknParams& P, double rho) {
  // For U the bracket (N-1-mu)|U'|/rho - (p-1)U'' collapses to
  // C m beta (N-s) rho^{beta-2} (1+t)^{-m-2}, which avoids cancellation at large rho.
  const BubbleShape shape = bubble_shape(P);
  if (rho == 0.0) return el_from_jet(P, rho, shape.value(rho), shape.deriv(rho), shape.deriv2(rho));
  const DerivedParams d = derive_unchecked(P);
  const double lr = std::log(rho);
  const double lp = log1p_exp(shape.beta * lr);
  const double log_lhs = -P.mu * lr + (P.p - 2.0) * shape.log_abs_deriv(rho) +
                         std::log(shape.C * shape.m * shape.beta * (P.N - P.s)) +
                         (shape.beta - 2.0) * lr - (shape.m + 2.0) * lp;
  ElSides sides;
  sides.lhs = std::exp(log_lhs);
  sides.rhs = std::exp(-P.s * lr + (d.r - 1.0) * shape.log_value(rho));
  return sides;
}

ElSides el_sides(const RadialProfile& u, const CknParams& P, double rho) {
  return el_from_jet(P, rho, u.value(rho), u.deriv(rho), u.deriv2(rho));
}

double el_residual(const CknParams& P, double rho) { return el_sides(P, rho).residual(); }

double el_residual(const RadialProfile& u, const CknParams& P, double rho) {
  return el_sides(u, P, rho).residual();
}

ElScaling el_scaling(const CknParams& P, const std::vector<double>& radii) {
  std::vector<double> ratios;
  for (double rho : radii) {
    const ElSides s = el_sides(P, rho);
    if (s.rhs != 0.0) ratios.push_back(s.lhs / s.rhs);
  }
  ElScaling out;
  if (ratios.empty()) return out;
  double sum = 0.0;
  for (double r : ratios) sum += r;
  out.mean_ratio = sum / ratios.size();
  for (double r : ratios) {
    out.max_deviation =
        std::max(out.max_deviation, std::abs(r - out.mean_ratio) / std::abs(out.mean_ratio));
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) {
    throw Error(ErrorKind::InvalidArgument, "log_grid needs 0 < lo <= hi and n >= 1");
  }
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

// ---------------------------------------------------------------------------------------------
// CSV

RadialProfile read_profile_csv(std::istream& in) {
  std::vector<double> radii, values, derivs;
  std::string line;
  int columns = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        const auto rest = cell.find_first_not_of(" \t\r", used);
        if (rest != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (radii.empty() && columns < 0) continue;  // header
      throw Error(ErrorKind::InvalidArgument, "malformed CSV line " + std::to_string(lineno));
    }
    const int n = static_cast<int>(fields.size());
    if (n < 2 || n > 3) {
      throw Error(ErrorKind::InvalidArgument,
                  "expected 2 or 3 columns on line " + std::to_string(lineno));
    }
    if (columns < 0) columns = n;
    if (n != columns) {
      throw Error(ErrorKind::InvalidArgument, "ragged CSV at line " + std::to_string(lineno));
    }
    radii.push_back(fields[0]);
    values.push_back(fields[1]);
    if (n == 3) derivs.push_back(fields[2]);
  }
  return sampled(std::move(radii), std::move(values), std::move(derivs));
}

RadialProfile read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  return read_profile_csv(in);
}

void write_profile_csv(std::ostream& out, const std::vector<double>& radii,
                       const RadialProfile& profile, bool with_derivative) {
  const auto old = out.precision(17);
  out << (with_derivative ? "radius,value,derivative\n" : "radius,value\n");
  for (double rho : radii) {
    out << rho << ',' << profile.value(rho);
    if (with_derivative) out << ',' << profile.deriv(rho);
    out << '\n';
  }
  out.precision(old);
}

}  // namespace ckn
