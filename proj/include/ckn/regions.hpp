#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ckn {

enum class Verdict { NotAchieved, SymmetryBreaking, Symmetric, OpenConjectured, OutsideScope };
std::string to_string(Verdict v);

struct RegionVerdict {
  Verdict verdict = Verdict::OutsideScope;
  /// Criterion that decided the verdict; empty for OutsideScope.
  std::string provenance;
  /// For OpenConjectured: R1 - L, the signed distance to the conjectured boundary
  /// (>= 0 inside the conjectured symmetry region).
  std::optional<double> margin;
};

/// (N - p) / p.
double critical_a(int N, double p);

/// Felli-Schneider curve for p = 2:
///   N (a_c - a) / (2 sqrt((a_c - a)^2 + N - 1)) + a - a_c,  a_c = (N - 2)/2.
/// Throws DomainError for a >= 0.
double b_fs(int N, double a);

/// Sides of the published criteria, with X = N / (1 + a - b):
///   L = (1 + a - b)(a_c - a)/(a_c - a + b),  R1 = sqrt((N-1)/(X-1)),  R2 = sqrt((N-2)/(X-2)).
struct CriterionSides {
  double L = 0.0;
  double R1 = 0.0;
  double R2 = 0.0;
};
CriterionSides criterion_sides(int N, double p, double a, double b);

/// 1 < p < N, a < a_c, a <= b <= a + 1.
bool in_strip(int N, double p, double a, double b);

RegionVerdict classify(int N, double p, double a, double b);

/// Upper end of {b in (a, a+1) : L > R1} (the breaking boundary), if that set is nonempty.
/// The conjectured symmetry boundary L = R1 is the same curve.
std::optional<double> cm_boundary(int N, double p, double a);
/// Upper end of {b in [a, a+1) : L > R2}, if nonempty.
std::optional<double> cc_boundary(int N, double p, double a);

struct RegionCell {
  double a = 0.0;
  double b = 0.0;
  RegionVerdict verdict;
};

struct RegionMap {
  int N = 0;
  double p = 0.0;
  std::vector<RegionCell> cells;  // a-major
  /// Curve name -> sampled (a, b) points. Names: diagonal, upper_edge, breaking (b_fs at
  /// p = 2, the L = R1 root otherwise), ciraolo_corso, conjectured.
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
};

/// Grid a_lo, a_lo + step, ... <= a_hi (same for b). An empty range gives an empty map.
/// Throws InvalidArgument for step <= 0.
RegionMap region_map(int N, double p, double a_lo, double a_hi, double b_lo, double b_hi,
                     double step, int jobs = 1);

/// Shape of a p = 2 map: within every column a, breaking cells sit below symmetric ones,
/// breaking occurs only for a < 0 and below b_FS, and symmetric cells with a < 0 sit on or
/// above it.
struct Topology {
  int breaking = 0;
  int symmetric = 0;
  int not_achieved = 0;
  int open = 0;
  int misplaced = 0;  // cells violating the ordering
  bool ok() const { return breaking > 0 && symmetric > 0 && misplaced == 0; }
};
Topology p2_topology(const RegionMap& map);

void write_region_csv(std::ostream& out, const RegionMap& map);
void write_curve_csv(std::ostream& out, const std::vector<std::pair<double, double>>& curve);

}  // namespace ckn
