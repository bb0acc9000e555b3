#include "doctest.h"

#include <cmath>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/regions.hpp"

using namespace ckn;

TEST_CASE("Felli-Schneider curve") {
  CHECK(b_fs(5, -1.0) == doctest::Approx(-0.547827976392424180948714123590910590085).epsilon(1e-15));
  CHECK(std::abs(b_fs(5, -1e-12)) <= 1e-11);
  CHECK_THROWS_AS(b_fs(5, 0.0), Error);
  try {
    b_fs(5, 0.5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainError);
  }
  for (int N : {3, 4, 5, 7}) {
    for (double a = -3.0; a < 0.0; a += 0.01) {
      const double b = b_fs(N, a);
      CHECK(a < b);
      CHECK(b < a + 1.0);
    }
  }
}

TEST_CASE("reference classifications") {
  const RegionVerdict fs = classify(5, 2, -1, -0.8);
  CHECK(fs.verdict == Verdict::SymmetryBreaking);
  CHECK(fs.provenance == "felli_schneider");
  CHECK(classify(5, 2, 0.5, 0.7).verdict == Verdict::Symmetric);
  const RegionVerdict ll = classify(5, 3, 1.0 / 6, 1.0 / 3);
  CHECK(ll.verdict == Verdict::Symmetric);
  CHECK(ll.provenance == "lam_lu");

  CHECK(classify(5, 2, -1, 0).verdict == Verdict::NotAchieved);
  CHECK(classify(5, 2, -1, -1).verdict == Verdict::NotAchieved);
  CHECK(classify(5, 2, 0.5, 0.5).verdict == Verdict::Symmetric);
  // Closed inequality on the curve: symmetric.
  CHECK(classify(5, 2, -1, b_fs(5, -1)).verdict == Verdict::Symmetric);

  const RegionVerdict out = classify(5, 2, 2.0, 2.5);
  CHECK(out.verdict == Verdict::OutsideScope);
  CHECK(out.provenance.empty());
  CHECK(classify(5, 2, 0.0, -0.5).verdict == Verdict::OutsideScope);
  CHECK(classify(5, 6, 0.0, 0.5).verdict == Verdict::OutsideScope);

  const RegionVerdict open = classify(5, 3, -1.0, -0.1);
  CHECK(open.verdict != Verdict::OutsideScope);
  CHECK_FALSE(open.provenance.empty());
  if (open.verdict == Verdict::OpenConjectured) CHECK(open.margin.has_value());
}

TEST_CASE("breaking boundary specializes to the Felli-Schneider curve") {
  for (int N : {3, 5, 8}) {
    for (double a = -3.0; a < -1e-3; a += 0.013) {
      CAPTURE(N);
      CAPTURE(a);
      const auto b = cm_boundary(N, 2.0, a);
      REQUIRE(b.has_value());
      CHECK(std::abs(*b - b_fs(N, a)) <= 1e-9);
    }
    for (double a : {0.0, 0.2, 0.4}) CHECK_FALSE(cm_boundary(N, 2.0, a).has_value());
  }
}

TEST_CASE("Ciraolo-Corso region lies inside the conjectured one") {
  for (double p : {1.5, 2.0, 3.0}) {
    const double ac = critical_a(5, p);
    for (double a = -2.0; a < ac; a += 0.05) {
      for (double t = 0.0; t < 1.0; t += 0.02) {
        const double b = a + t;
        const CriterionSides c = criterion_sides(5, p, a, b);
        if (c.L <= c.R2) CHECK(c.L <= c.R1);
        CHECK(c.R2 <= c.R1 * (1 + 1e-15));
      }
    }
  }
}

TEST_CASE("p = 2 map topology") {
  const RegionMap m = region_map(5, 2.0, -3.0, 1.49, -3.0, 2.49, 0.0275);
  int breaking = 0, symmetric = 0;
  double a_prev = std::nan("");
  bool seen_symmetric = false;
  for (const RegionCell& c : m.cells) {
    if (c.a != a_prev) {
      seen_symmetric = false;
      a_prev = c.a;
    }
    const Verdict v = c.verdict.verdict;
    if (v == Verdict::SymmetryBreaking) {
      ++breaking;
      CHECK(c.a < 0.0);
      CHECK(c.b < b_fs(5, c.a));
      CHECK_FALSE(seen_symmetric);
    }
    if (v == Verdict::Symmetric) {
      ++symmetric;
      seen_symmetric = true;
      if (c.a < 0.0) CHECK(c.b >= b_fs(5, c.a));
    }
    if (v != Verdict::OutsideScope) CHECK(in_strip(5, 2.0, c.a, c.b));
  }
  CHECK(breaking > 0);
  CHECK(symmetric > 0);
  const Topology t = p2_topology(m);
  CHECK(t.ok());
  CHECK(t.breaking == breaking);
  CHECK(t.open == 0);
  CHECK(m.curves.at("breaking").size() > 0);
  for (const auto& [a, b] : m.curves.at("breaking")) CHECK(a < 0.0);

  std::ostringstream csv;
  write_region_csv(csv, m);
  CHECK(csv.str().rfind("a,b,verdict,provenance\n", 0) == 0);
}

TEST_CASE("empty and invalid maps") {
  CHECK(region_map(5, 2.0, 1.0, 0.0, 0.0, 1.0, 0.1).cells.empty());
  CHECK_THROWS_AS(region_map(5, 2.0, 0.0, 1.0, 0.0, 1.0, 0.0), Error);
  const RegionMap a = region_map(5, 3.0, -1.0, 0.6, -1.0, 1.6, 0.05, 1);
  const RegionMap b = region_map(5, 3.0, -1.0, 0.6, -1.0, 1.6, 0.05, 4);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].verdict.verdict == b.cells[i].verdict.verdict);
  }
}
