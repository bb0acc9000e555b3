#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ckn/acceptance.hpp"
#include "ckn/errors.hpp"
#include "ckn/extremals.hpp"
#include "ckn/functionals.hpp"
#include "ckn/ineq.hpp"
#include "ckn/manifold.hpp"
#include "ckn/parallel.hpp"
#include "ckn/params.hpp"
#include "ckn/regions.hpp"
#include "ckn/spectral.hpp"
#include "ckn/stability.hpp"

#ifndef CKN_VERSION
#define CKN_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
using namespace ckn;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct Output {
  json params = json::object();
  json results = json::object();
  Table table;
  /// Extra CSV files written next to --out (suffix -> table).
  std::vector<std::pair<std::string, Table>> extra;
  int exit_code = 0;
  std::string failure;
};

struct Config {
  int N = 5;
  double p = 2.0, mu = 1.0, s = 2.0;
  std::uint64_t seed = 1;
  double rel_tol = 1e-10;
  std::string out;
  std::string format = "json";
  int jobs = 1;
};

json config_json(const Config& c, const std::string& command) {
  return {{"command", command}, {"seed", c.seed},     {"rel_tol", c.rel_tol},
          {"format", c.format}, {"jobs", c.jobs},     {"out", c.out}};
}

json params_json(const CknParams& P) { return {{"N", P.N}, {"p", P.p}, {"mu", P.mu}, {"s", P.s}}; }

QuadratureSpec spec_of(const Config& c) {
  QuadratureSpec q;
  q.rel_tol = c.rel_tol;
  return q;
}

void write_table(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
    f << content;
    if (!f) throw Error(ErrorKind::InvalidArgument, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string extra_path(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  const std::string stem = p.stem().string();
  return (p.parent_path() / (stem + "." + suffix + ".csv")).string();
}

void emit(const Config& c, const std::string& command, const Output& o) {
  std::ostringstream body;
  if (c.format == "json") {
    json env = {{"params", o.params},
                {"config", config_json(c, command)},
                {"results", o.results},
                {"version", CKN_VERSION}};
    body << env.dump(2) << '\n';
  } else {
    write_table(body, o.table);
  }
  if (c.out.empty()) {
    std::cout << body.str();
  } else {
    write_atomic(c.out, body.str());
    if (c.format == "csv") {
      for (const auto& [suffix, table] : o.extra) {
        std::ostringstream e;
        write_table(e, table);
        write_atomic(extra_path(c.out, suffix), e.str());
      }
    }
  }
}

// ---------------------------------------------------------------------------------------

Output cmd_validate(const Config& c) {
  const CknParams P = validate(c.N, c.p, c.mu, c.s);
  const DerivedParams d = derive(P);
  const GapCondition g = gap_condition(P);
  Output o;
  o.params = params_json(P);
  o.results = {{"r", d.r},           {"a", d.a},         {"b", d.b},
               {"a_c", d.a_c},       {"rho_var", d.rho_var}, {"s_prime", d.s_prime},
               {"K", d.K},           {"sigma", d.sigma}, {"inner_exp", d.inner_exp},
               {"decay_exp", d.decay_exp}, {"gap_lhs", g.lhs}, {"gap_rhs", g.rhs}};
  o.table.header = {"name", "value"};
  for (auto it = o.results.begin(); it != o.results.end(); ++it) {
    o.table.add({it.key(), num(it.value().get<double>())});
  }
  return o;
}

struct Sweep {
  double lo = 1e-3, hi = 1e3;
  int points = 61;
};

Output cmd_bubble(const Config& c, const Sweep& sw) {
  const CknParams P = validate(c.N, c.p, c.mu, c.s);
  const RadialProfile U = bubble(P), W = tangent_generator(P);
  Output o;
  o.params = params_json(P);
  o.table.header = {"rho", "U", "dU", "W0", "dW0"};
  json rows = json::array();
  for (double rho : log_grid(sw.lo, sw.hi, sw.points)) {
    const double v[] = {rho, U.value(rho), U.deriv(rho), W.value(rho), W.deriv(rho)};
    o.table.add({num(v[0]), num(v[1]), num(v[2]), num(v[3]), num(v[4])});
    rows.push_back({{"rho", v[0]}, {"U", v[1]}, {"dU", v[2]}, {"W0", v[3]}, {"dW0", v[4]}});
  }
  o.results = {{"C", normalization_constant(P)}, {"samples", rows}};
  return o;
}

Output cmd_residual(const Config& c, const Sweep& sw) {
  const CknParams P = validate(c.N, c.p, c.mu, c.s);
  Output o;
  o.params = params_json(P);
  o.table.header = {"rho", "lhs", "rhs", "relative"};
  json rows = json::array();
  double worst = 0.0;
  for (double rho : log_grid(sw.lo, sw.hi, sw.points)) {
    const ElSides e = el_sides(P, rho);
    worst = std::max(worst, e.relative());
    o.table.add({num(rho), num(e.lhs), num(e.rhs), num(e.relative())});
    rows.push_back({{"rho", rho}, {"lhs", e.lhs}, {"rhs", e.rhs}, {"relative", e.relative()}});
  }
  o.results = {{"max_relative", worst}, {"samples", rows}};
  return o;
}

Output cmd_constant(const Config& c) {
  const CknParams P = validate(c.N, c.p, c.mu, c.s);
  const BestConstant bc = best_constant_report(P, spec_of(c));
  Output o;
  o.params = params_json(P);
  o.results = {{"S", bc.S},
               {"grad_integral", bc.grad_integral},
               {"star_integral", bc.star_integral},
               {"consistency", bc.consistency}};
  o.table.header = {"S", "grad_integral", "star_integral", "consistency"};
  o.table.add({num(bc.S), num(bc.grad_integral), num(bc.star_integral), num(bc.consistency)});
  return o;
}

Output cmd_spectrum(const Config& c, int mode, int neigs, int grid) {
  const CknParams P = validate(c.N, c.p, c.mu, c.s);
  SpectralOptions so;
  so.jobs = c.jobs;
  const Spectrum sp = eigen_solve(assemble(P, mode), neigs, grid, so);
  Output o;
  o.params = params_json(P);
  o.table.header = {"mode", "j", "alpha", "xi", "error", "sign_changes"};
  json rows = json::array();
  for (int j = 0; j < neigs; ++j) {
    o.table.add({std::to_string(mode), std::to_string(j), num(sp.alphas[j]), num(sp.xis[j]),
                 num(sp.errors[j]), std::to_string(sp.sign_changes[j])});
    rows.push_back({{"j", j},
                    {"alpha", sp.alphas[j]},
                    {"xi", sp.xis[j]},
                    {"error", sp.errors[j]},
                    {"sign_changes", sp.sign_changes[j]}});
  }
  o.results = {{"mode", mode},
               {"alpha_scale", sp.alpha_scale},
               {"grid_sizes", sp.grid_sizes},
               {"eigenvalues", rows}};
  return o;
}

Output cmd_nondegeneracy(const Config& c, int grid, int k_max) {
  const CknParams P = validate(c.N, c.p, c.mu, c.s);
  SpectralOptions so;
  so.jobs = c.jobs;
  const KnownModes km = verify_known_modes(P, grid, k_max, so);
  Output o;
  o.params = params_json(P);
  o.results = {{"xi1", km.xi1},
               {"xi2", km.xi2},
               {"xi3", km.xi3},
               {"xi1_error", km.xi1_error},
               {"xi2_error", km.xi2_error},
               {"lowest_xi", km.lowest_xi},
               {"min_margin", km.min_margin},
               {"min_margin_mode", km.min_margin_mode},
               {"separation", km.separation},
               {"simple", km.simple},
               {"gap_lhs", km.gap_lhs},
               {"gap_rhs", km.gap_rhs},
               {"gap_precondition", km.gap_precondition},
               {"nondegenerate", km.nondegenerate}};
  o.table.header = {"mode", "lowest_xi", "margin"};
  const double r = derive(P).r;
  o.table.add({"0", num(km.xi3), num(km.xi3 - (r - 1))});
  for (std::size_t k = 0; k < km.lowest_xi.size(); ++k) {
    o.table.add({std::to_string(k + 1), num(km.lowest_xi[k]), num(km.lowest_xi[k] - (r - 1))});
  }
  if (!km.nondegenerate) {
    o.exit_code = 2;
    o.failure = "non-degeneracy check failed";
  }
  return o;
}

Output cmd_gap(const Config& c, int grid, int k_max) {
  const CknParams P = validate(c.N, c.p, c.mu, c.s);
  SpectralOptions so;
  so.jobs = c.jobs;
  const GapReport g = spectral_gap(P, k_max, grid, so);
  Output o;
  o.params = params_json(P);
  o.results = {{"tau_hat", g.tau_hat},
               {"mode", g.mode},
               {"xi3_mode0", g.xi3_mode0},
               {"lowest_xi", g.lowest_xi}};
  o.table.header = {"tau_hat", "mode", "xi3_mode0"};
  o.table.add({num(g.tau_hat), std::to_string(g.mode), num(g.xi3_mode0)});
  return o;
}

Output cmd_distance(const Config& c, const std::string& profile) {
  const CknParams P = validate(c.N, c.p, c.mu, c.s);
  const RadialProfile u = read_profile_csv(profile);
  const DistanceResult d = distance_to_manifold(u, P);
  Output o;
  o.params = params_json(P);
  o.results = {{"distance", d.distance},
               {"c", d.point.c},
               {"lambda", d.point.lambda},
               {"residual_c", d.residual_c},
               {"residual_lambda", d.residual_lambda},
               {"profile", profile}};
  o.table.header = {"distance", "c", "lambda", "residual_c", "residual_lambda"};
  o.table.add({num(d.distance), num(d.point.c), num(d.point.lambda), num(d.residual_c),
               num(d.residual_lambda)});
  return o;
}

RadialProfile pick_direction(const CknParams& P, int direction, const std::string& profile) {
  if (!profile.empty()) {
    return normalized(project_tangent_orthogonal(read_profile_csv(profile), P), P);
  }
  const auto dirs = scan_directions(P);
  if (direction < 0 || direction >= static_cast<int>(dirs.size())) {
    throw Error(ErrorKind::InvalidArgument, "direction must be 0, 1 or 2");
  }
  return dirs[direction];
}

Output cmd_scan(const Config& c, int direction, const std::string& profile, double lo, double hi,
                int n) {
  const CknParams P = validate(c.N, c.p, c.mu, c.s);
  const RadialProfile w = pick_direction(P, direction, profile);
  ScanOptions so;
  so.jobs = c.jobs;
  const ScanReport s = stability_scan_report(P, w, log_spaced(lo, hi, n), so);
  Output o;
  o.params = params_json(P);
  o.table.header = {"eps", "distance", "deficit", "ratio_gamma", "ratio_p", "c", "lambda"};
  json rows = json::array();
  for (const ScanPoint& pt : s.points) {
    o.table.add({num(pt.eps), num(pt.distance), num(pt.deficit), num(pt.ratio_gamma),
                 num(pt.ratio_p), num(pt.point.c), num(pt.point.lambda)});
    rows.push_back({{"eps", pt.eps},
                    {"distance", pt.distance},
                    {"deficit", pt.deficit},
                    {"ratio_gamma", pt.ratio_gamma},
                    {"ratio_p", pt.ratio_p}});
  }
  o.results = {{"direction", s.direction},
               {"gamma_used", s.gamma_used},
               {"fitted_exponent", s.fitted_exponent},
               {"correlation", s.correlation},
               {"fit_points", s.fit_points},
               {"lower_bound_B", s.lower_bound_B},
               {"distances_monotone", s.distances_monotone},
               {"ratio_p_decreasing", s.ratio_p_decreasing},
               {"points", rows}};
  if (std::abs(s.correlation) < 0.99) {
    o.exit_code = exit_code_for(ErrorKind::DegenerateFit);
    o.failure = "log-log correlation below 0.99";
  } else if (!(s.lower_bound_B > 0.0)) {
    o.exit_code = exit_code_for(ErrorKind::StabilityViolation);
    o.failure = "deficit / d^gamma not bounded below by a positive constant";
  }
  return o;
}

struct ExpansionArgs {
  double c = 1.0, lambda = 1.0, d = 0.01, kappa = 0.1;
  int direction = 0;
  std::optional<double> C1, C2;
  int samples = 20000;
};

Output cmd_expansion(const Config& cfg, const ExpansionArgs& a) {
  const CknParams P = validate(cfg.N, cfg.p, cfg.mu, cfg.s);
  const RadialProfile w = pick_direction(P, a.direction, "");
  const double r = derive(P).r;
  const double C1 = a.C1 ? *a.C1
                         : search_constant(ConstantKind::C1, P.p, a.kappa, a.samples, cfg.seed,
                                           P.N, cfg.jobs)
                               .constant;
  const double C2 = a.C2 ? *a.C2
                         : search_constant(ConstantKind::C2, r, a.kappa, a.samples, cfg.seed,
                                           P.N, cfg.jobs)
                               .constant;
  const ExpansionReport e = expansion_check(P, a.c, a.lambda, w, a.d, a.kappa, C1, C2);
  Output o;
  o.params = params_json(P);
  o.results = {{"c", a.c},
               {"lambda", a.lambda},
               {"d", a.d},
               {"kappa", a.kappa},
               {"C1", C1},
               {"C2", C2},
               {"grad_p", e.grad_p},
               {"lower_bound", e.lower_bound},
               {"star_r", e.star_r},
               {"upper_bound", e.upper_bound},
               {"margin_lower", e.margin_lower},
               {"margin_upper", e.margin_upper},
               {"pairing_grad", e.pairing_grad},
               {"pairing_star", e.pairing_star}};
  o.table.header = {"name", "value"};
  for (auto it = o.results.begin(); it != o.results.end(); ++it) {
    o.table.add({it.key(), num(it.value().get<double>())});
  }
  if (e.margin_lower < 0.0 || e.margin_upper < 0.0) {
    o.exit_code = 2;
    o.failure = "negative expansion margin";
  }
  return o;
}

Output cmd_ineq(const Config& c, const std::string& kind, double param, double kappa,
                int samples, int dim, std::optional<double> constant) {
  const ConstantKind k = kind == "C1" ? ConstantKind::C1 : ConstantKind::C2;
  const ConstantSearch s = constant
                               ? count_violations(k, param, kappa, *constant, samples, c.seed, dim, c.jobs)
                               : search_constant(k, param, kappa, samples, c.seed, dim, c.jobs);
  Output o;
  o.params = {{"kind", kind}, {"parameter", param}, {"kappa", kappa}, {"N", dim}};
  o.results = {{"constant", s.constant},
               {"samples", s.samples},
               {"seed", s.seed},
               {"worst_margin", s.worst_margin},
               {"violations", s.violations},
               {"mode", constant ? "check" : "search"}};
  if (k == ConstantKind::C2) o.results["branch"] = to_string(branch_for(param));
  o.table.header = {kind == "C1" ? "p" : "r", "kappa", "constant", "samples", "worst_margin",
                    "violations"};
  o.table.add({num(param), num(kappa), num(s.constant), std::to_string(s.samples),
               num(s.worst_margin), std::to_string(s.violations)});
  if (s.violations > 0) {
    o.exit_code = 2;
    o.failure = std::to_string(s.violations) + " sampled violations";
  }
  return o;
}

json verdict_json(const RegionVerdict& v) {
  json j = {{"verdict", to_string(v.verdict)}, {"provenance", v.provenance}};
  if (v.margin) j["margin"] = *v.margin;
  return j;
}

struct RegionArgs {
  bool map = false;
  double a = 0.0, b = 0.0;
  double a_lo = -3.0, a_hi = 1.5, b_lo = -3.0, b_hi = 2.5, step = 0.05;
};

Output cmd_regions(const Config& c, const RegionArgs& ra) {
  Output o;
  o.params = {{"N", c.N}, {"p", c.p}};
  if (!ra.map) {
    const RegionVerdict v = classify(c.N, c.p, ra.a, ra.b);
    o.params["a"] = ra.a;
    o.params["b"] = ra.b;
    o.results = verdict_json(v);
    o.table.header = {"a", "b", "verdict", "provenance", "margin"};
    o.table.add({num(ra.a), num(ra.b), to_string(v.verdict), v.provenance,
                 v.margin ? num(*v.margin) : ""});
    return o;
  }
  const RegionMap m = region_map(c.N, c.p, ra.a_lo, ra.a_hi, ra.b_lo, ra.b_hi, ra.step, c.jobs);
  o.table.header = {"a", "b", "verdict", "provenance"};
  json cells = json::array();
  for (const RegionCell& cell : m.cells) {
    o.table.add({num(cell.a), num(cell.b), to_string(cell.verdict.verdict), cell.verdict.provenance});
    cells.push_back({{"a", cell.a}, {"b", cell.b}, {"verdict", to_string(cell.verdict.verdict)},
                     {"provenance", cell.verdict.provenance}});
  }
  json curves = json::object();
  for (const auto& [name, pts] : m.curves) {
    Table t;
    t.header = {"a", "b"};
    json arr = json::array();
    for (const auto& [a, b] : pts) {
      t.add({num(a), num(b)});
      arr.push_back({a, b});
    }
    curves[name] = arr;
    o.extra.emplace_back(name, std::move(t));
  }
  o.results = {{"cells", cells},
               {"curves", curves},
               {"range", {{"a_lo", ra.a_lo}, {"a_hi", ra.a_hi}, {"b_lo", ra.b_lo}, {"b_hi", ra.b_hi}, {"step", ra.step}}}};
  if (c.p == 2.0 && !m.cells.empty()) {
    const Topology t = p2_topology(m);
    o.results["topology"] = {{"breaking", t.breaking},
                             {"symmetric", t.symmetric},
                             {"not_achieved", t.not_achieved},
                             {"misplaced", t.misplaced},
                             {"ok", t.ok()}};
  }
  return o;
}

Output cmd_all(const Config& c, const std::vector<int>& only) {
  AcceptanceOptions opt;
  opt.jobs = c.jobs;
  opt.seed = c.seed;
  Output o;
  o.table.header = {"id", "name", "status", "detail"};
  json rows = json::array();
  int failed = 0;
  run_acceptance(opt, only, [&](const CriterionResult& r) {
    std::cerr << format_result(r) << '\n';
    if (!r.passed) ++failed;
    std::string detail = r.detail;
    for (char& ch : detail) {
      if (ch == ',') ch = ';';
    }
    o.table.add({std::to_string(r.id), r.name, r.passed ? "PASS" : "FAIL", detail});
    rows.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  });
  o.results = {{"criteria", rows}, {"failed", failed}};
  if (failed > 0) {
    o.exit_code = 2;
    o.failure = std::to_string(failed) + " acceptance criteria failed";
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification lab for weighted Sobolev-type inequalities", "ckn_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CKN_VERSION);

  Config cfg;
  cfg.jobs = default_jobs();
  auto common = [&](CLI::App* sub, bool with_params) {
    if (with_params) {
      sub->add_option("--N", cfg.N, "dimension")->capture_default_str();
      sub->add_option("--p", cfg.p, "gradient exponent")->capture_default_str();
      sub->add_option("--mu", cfg.mu, "gradient weight")->capture_default_str();
      sub->add_option("--s", cfg.s, "potential weight")->capture_default_str();
    }
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sub->add_option("--rel-tol", cfg.rel_tol, "adaptive quadrature tolerance")->capture_default_str();
    sub->add_option("--out", cfg.out, "output file (written atomically); stdout when empty");
    sub->add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "worker threads")
        ->envname("CKN_LAB_JOBS")
        ->check(CLI::PositiveNumber);
  };

  std::function<Output()> action;
  std::string command;
  auto sub = [&](const char* name, const char* help, bool with_params) {
    CLI::App* s = app.add_subcommand(name, help);
    common(s, with_params);
    s->callback([&command, name] { command = name; });
    return s;
  };

  Sweep sweep;
  auto add_sweep = [&](CLI::App* s) {
    s->add_option("--lo", sweep.lo, "smallest radius")->capture_default_str();
    s->add_option("--hi", sweep.hi, "largest radius")->capture_default_str();
    s->add_option("--points", sweep.points, "number of radii")->capture_default_str();
  };

  CLI::App* s_validate = sub("validate", "check a parameter tuple and print derived constants", true);
  CLI::App* s_bubble = sub("bubble", "sample U and W0", true);
  add_sweep(s_bubble);
  CLI::App* s_residual = sub("residual", "Euler-Lagrange residual table", true);
  add_sweep(s_residual);
  CLI::App* s_constant = sub("constant", "best constant with its consistency check", true);

  int mode = 0, neigs = 3, grid = 4096, k_max = 3;
  CLI::App* s_spectrum = sub("spectrum", "eigenvalues of one spherical mode", true);
  s_spectrum->add_option("--mode", mode, "spherical mode k")->capture_default_str();
  s_spectrum->add_option("--neigs", neigs, "number of eigenvalues")->capture_default_str();
  s_spectrum->add_option("--grid", grid, "coarsest grid size")->capture_default_str();
  CLI::App* s_nondeg = sub("nondegeneracy", "known modes and kernel dimension", true);
  s_nondeg->add_option("--grid", grid, "coarsest grid size")->capture_default_str();
  s_nondeg->add_option("--kmax", k_max, "highest spherical mode")->capture_default_str();
  CLI::App* s_gap = sub("gap", "spectral gap tau_hat", true);
  s_gap->add_option("--grid", grid, "coarsest grid size")->capture_default_str();
  s_gap->add_option("--kmax", k_max, "highest spherical mode")->capture_default_str();

  std::string profile;
  CLI::App* s_distance = sub("distance", "distance of a sampled profile to the extremal manifold", true);
  s_distance->add_option("--profile", profile, "CSV with radius,value[,derivative]")->required();

  int direction = 0, eps_n = 8;
  double eps_lo = 1e-3, eps_hi = 1e-1;
  CLI::App* s_scan = sub("scan", "deficit versus distance along U + eps w", true);
  s_scan->add_option("--direction", direction, "built-in direction 0, 1 or 2")->capture_default_str();
  s_scan->add_option("--profile", profile, "direction from CSV (projected and normalized)");
  s_scan->add_option("--eps-lo", eps_lo, "smallest eps")->capture_default_str();
  s_scan->add_option("--eps-hi", eps_hi, "largest eps")->capture_default_str();
  s_scan->add_option("--eps-n", eps_n, "number of eps values")->capture_default_str();

  ExpansionArgs ex;
  double C1 = 0.0, C2 = 0.0;
  CLI::App* s_exp = sub("expansion", "second-order expansion margins of cU_lambda + d w", true);
  s_exp->add_option("--c", ex.c, "multiple")->capture_default_str();
  s_exp->add_option("--lambda", ex.lambda, "dilation")->capture_default_str();
  s_exp->add_option("--d", ex.d, "perturbation size")->capture_default_str();
  s_exp->add_option("--kappa", ex.kappa, "kappa in (0, 1)")->capture_default_str();
  s_exp->add_option("--direction", ex.direction, "built-in direction 0, 1 or 2")->capture_default_str();
  s_exp->add_option("--samples", ex.samples, "samples for the constant searches")->capture_default_str();
  CLI::Option* o_c1 = s_exp->add_option("--C1", C1, "fixed C1 instead of a search");
  CLI::Option* o_c2 = s_exp->add_option("--C2", C2, "fixed C2 instead of a search");

  std::string kind = "C1";
  double param = 3.0, kappa = 0.5, constant = 0.0;
  int samples = 100000, dim = 5;
  CLI::App* s_ineq = sub("ineq", "appendix inequality testers and constant search", false);
  s_ineq->add_option("--kind", kind, "C1 (vector, parameter p) or C2 (scalar, parameter r)")
      ->check(CLI::IsMember({"C1", "C2"}))
      ->capture_default_str();
  s_ineq->add_option("--param", param, "p for C1, r for C2")->capture_default_str();
  s_ineq->add_option("--kappa", kappa, "kappa in (0, 1)")->capture_default_str();
  s_ineq->add_option("--samples", samples, "number of samples")->capture_default_str();
  s_ineq->add_option("--dim", dim, "vector dimension for C1")->capture_default_str();
  CLI::Option* o_const = s_ineq->add_option("--constant", constant, "check this constant instead of searching");

  RegionArgs ra;
  CLI::App* s_regions = sub("regions", "symmetry region classifier and map", false);
  s_regions->add_option("--N", cfg.N, "dimension")->capture_default_str();
  s_regions->add_option("--p", cfg.p, "gradient exponent")->capture_default_str();
  s_regions->add_option("--a", ra.a, "a = mu/p");
  s_regions->add_option("--b", ra.b, "b = s/r");
  s_regions->add_flag("--map", ra.map, "classify a grid and emit boundary curves");
  s_regions->add_option("--a-lo", ra.a_lo)->capture_default_str();
  s_regions->add_option("--a-hi", ra.a_hi)->capture_default_str();
  s_regions->add_option("--b-lo", ra.b_lo)->capture_default_str();
  s_regions->add_option("--b-hi", ra.b_hi)->capture_default_str();
  s_regions->add_option("--step", ra.step)->capture_default_str();

  std::vector<int> only;
  CLI::App* s_all = sub("all", "acceptance suite", false);
  s_all->add_option("--only", only, "criterion ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Output o;
    if (*s_validate) o = cmd_validate(cfg);
    else if (*s_bubble) o = cmd_bubble(cfg, sweep);
    else if (*s_residual) o = cmd_residual(cfg, sweep);
    else if (*s_constant) o = cmd_constant(cfg);
    else if (*s_spectrum) o = cmd_spectrum(cfg, mode, neigs, grid);
    else if (*s_nondeg) o = cmd_nondegeneracy(cfg, grid, k_max);
    else if (*s_gap) o = cmd_gap(cfg, grid, k_max);
    else if (*s_distance) o = cmd_distance(cfg, profile);
    else if (*s_scan) o = cmd_scan(cfg, direction, profile, eps_lo, eps_hi, eps_n);
    else if (*s_exp) {
      if (*o_c1) ex.C1 = C1;
      if (*o_c2) ex.C2 = C2;
      o = cmd_expansion(cfg, ex);
    } else if (*s_ineq) {
      o = cmd_ineq(cfg, kind, param, kappa, samples, dim,
                   *o_const ? std::optional<double>(constant) : std::nullopt);
    } else if (*s_regions) o = cmd_regions(cfg, ra);
    else if (*s_all) o = cmd_all(cfg, only);
    emit(cfg, command, o);
    if (o.exit_code != 0) std::cerr << "ckn_lab: " << o.failure << '\n';
    return o.exit_code;
  } catch (const Error& e) {
    std::cerr << "ckn_lab: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "ckn_lab: " << e.what() << '\n';
    return 1;
  }
}
