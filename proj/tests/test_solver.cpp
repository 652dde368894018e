#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "lgp/solver.hpp"
#include "support.hpp"

using namespace lgp;

namespace {

constexpr double kPi = std::numbers::pi;

// Perimeter of the optimal superlevel set of cos(2 theta) at level t, from
// the two candidate pairings of its four crossings.
double brothers_perimeter(double t) {
  return 4.0 * std::min(std::sqrt((1.0 - t) / 2.0), std::sqrt((1.0 + t) / 2.0));
}

}  // namespace

TEST(Sweep, BrothersChordsAreAxisAligned) {
  const auto family = sweep(brothers_datum(0.0), ConvexDomain::unit_disk(), Anisotropy::euclidean(), 100);
  ASSERT_EQ(family.levels.size(), 100u);
  for (const auto& s : family.levels) {
    ASSERT_EQ(s.matching.crossings.size(), 4u);
    for (const auto& c : s.matching.curves) {
      const Point d = c.back() - c.front();
      // Vertical chords above the median level, horizontal below.
      if (s.level() > 0.0)
        EXPECT_NEAR(d.x, 0.0, 1e-9);
      else
        EXPECT_NEAR(d.y, 0.0, 1e-9);
    }
  }
  EXPECT_TRUE(family.skipped.empty());
  EXPECT_TRUE(family.nesting_violations.empty());
}

TEST(Sweep, BrothersCoareaMatchesQuadrature) {
  const auto family = sweep(brothers_datum(0.0), ConvexDomain::unit_disk(), Anisotropy::euclidean(), 400);
  const double oracle = test::simpson(brothers_perimeter, -1.0, 1.0);
  EXPECT_NEAR(oracle, 8.0 * std::sqrt(2.0) / 3.0, 1e-5);
  EXPECT_NEAR(family.coarea_tv(), oracle, 2e-3);
}

TEST(Sweep, ArcDatumKeepsOneChord) {
  const auto disk = ConvexDomain::unit_disk();
  const BoundaryDatum f = arc_datum(0.5, 2.5);
  const auto family = sweep(f, disk, Anisotropy::euclidean(), 50);
  for (const auto& s : family.levels) ASSERT_EQ(s.matching.curves.size(), 1u);
  EXPECT_NEAR(family.coarea_tv(), 2.0 * std::sin(1.0), 1e-12);
  const SolutionField u = reconstruct(family, {128, 128});
  EXPECT_LE(trace_check(u, f, 0.01), 0.1);
  EXPECT_NEAR(u.value_at({0.0, 0.99}), family.levels.back().level(), 1e-15);
  EXPECT_EQ(u.value_at({0.0, -0.5}), 0.0);
}

TEST(Sweep, InputValidation) {
  const auto disk = ConvexDomain::unit_disk();
  try {
    sweep(BoundaryDatum::constant(2.0), disk, Anisotropy::euclidean());
    FAIL() << "constant datum accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
  }
  EXPECT_THROW(sweep(brothers_datum(0.0), disk, Anisotropy::euclidean(), 1), Error);
  // With two levels both land on piece values.
  const auto steps = BoundaryDatum::piecewise_constant({{0.0, 1.0, 0.25}, {2.0, 3.0, 0.75}, {4.0, 5.0, 1.0}});
  try {
    sweep(steps, disk, Anisotropy::euclidean(), 2);
    FAIL() << "datum without regular levels accepted";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no regular levels");
  }
  EXPECT_THROW(GridSpec({16, 64}).validate(), Error);
}

TEST(Sweep, NonRegularLevelsAreSkipped) {
  const auto steps = BoundaryDatum::piecewise_constant({{0.0, 1.0, 0.25}, {2.0, 3.0, 0.75}, {4.0, 5.0, 1.0}});
  const auto family = sweep(steps, ConvexDomain::unit_disk(), Anisotropy::euclidean(), 4);
  // Levels 1/8, 3/8, 5/8, 7/8: none is a piece value.
  EXPECT_EQ(family.levels.size(), 4u);
  const auto coarse = sweep(steps, ConvexDomain::unit_disk(), Anisotropy::euclidean(), 6);
  EXPECT_EQ(coarse.skipped.size() + coarse.levels.size(), 6u);
}

TEST(Sweep, IsDeterministic) {
  test::Rng rng(3);
  const BoundaryDatum f = test::random_trig_datum(rng);
  const auto a = sweep(f, ConvexDomain::ellipse({0, 0}, 1.4, 0.9), Anisotropy(3.0), 120);
  const auto b = sweep(f, ConvexDomain::ellipse({0, 0}, 1.4, 0.9), Anisotropy(3.0), 120);
  ASSERT_EQ(a.levels.size(), b.levels.size());
  for (std::size_t k = 0; k < a.levels.size(); ++k) {
    EXPECT_EQ(a.levels[k].matching.pairs, b.levels[k].matching.pairs);
    EXPECT_EQ(a.levels[k].matching.cost, b.levels[k].matching.cost);
  }
  EXPECT_EQ(reconstruct(a, {64, 64}).values(), reconstruct(b, {64, 64}).values());
}

TEST(Sweep, FamiliesAreNested) {
  test::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const BoundaryDatum f = test::random_trig_datum(rng);
    for (const auto& aniso : {Anisotropy(1.0), Anisotropy::euclidean(), Anisotropy::infinity()}) {
      const auto family = sweep(f, ConvexDomain::unit_disk(), aniso, 80);
      EXPECT_TRUE(family.nesting_violations.empty());
      EXPECT_NO_THROW(verify_nesting(family));
      EXPECT_EQ(test::touching_curve_pairs(family), 0u);
    }
  }
}

TEST(Solution, ValuesStayWithinDatumRange) {
  test::Rng rng(13);
  const BoundaryDatum f = test::random_trig_datum(rng);
  const SolutionField u = reconstruct(sweep(f, ConvexDomain::unit_disk(), Anisotropy::euclidean(), 100), {96, 96});
  for (std::size_t k = 0; k < u.values().size(); ++k) {
    if (!u.mask()[k]) continue;
    EXPECT_GE(u.values()[k], f.min());
    EXPECT_LE(u.values()[k], f.max());
  }
}

TEST(Solution, GridTvOfLinearField) {
  // u = 2x + y on the unit disk: |grad u| times the area.
  const auto disk = ConvexDomain::unit_disk();
  const auto u = SolutionField::sample(disk, Anisotropy::euclidean(), {400, 400}, [](Point x) { return 2 * x.x + x.y; });
  EXPECT_NEAR(u.grid_tv(), std::sqrt(5.0) * kPi, 0.02 * kPi);
  const auto v = SolutionField::sample(disk, Anisotropy(1.0), {400, 400}, [](Point x) { return 2 * x.x + x.y; });
  EXPECT_NEAR(v.grid_tv(), 3.0 * kPi, 0.02 * kPi);
  EXPECT_FALSE(u.coarea_tv());
}

TEST(Solution, HarmonicCompetitorHasLargerVariation) {
  const auto disk = ConvexDomain::unit_disk();
  const GridSpec grid{256, 256};
  const SolutionField u = reconstruct(sweep(brothers_datum(0.0), disk, Anisotropy::euclidean(), 200), grid);
  const SolutionField harmonic =
      SolutionField::sample(disk, Anisotropy::euclidean(), grid, [](Point x) { return x.x * x.x - x.y * x.y; });
  // |grad(x^2 - y^2)| = 2r integrated over the disk.
  EXPECT_NEAR(harmonic.grid_tv(), 4.0 * kPi / 3.0, 0.03 * 4.0 * kPi / 3.0);
  const TvComparison cmp = compare_competitor(u, harmonic);
  EXPECT_EQ(cmp.measure, "grid");
  EXPECT_LT(cmp.solver_tv, cmp.competitor_tv);
  EXPECT_THROW(compare_competitor(harmonic, u), Error);

  const SolutionField shifted =
      SolutionField::sample(disk, Anisotropy::euclidean(), grid, [](Point x) { return x.x * x.x - x.y * x.y + 0.5; });
  EXPECT_THROW(compare_competitor(u, shifted), Error);
}

TEST(Solution, AlternativeFamilyAtPolyhedralNorm) {
  const auto disk = ConvexDomain::unit_disk();
  const auto base = sweep(brothers_datum(0.7), disk, Anisotropy(1.0), 60);
  std::size_t changed = 0;
  const auto alt = alternative_family(base, &changed);
  EXPECT_GT(changed, 0u);
  EXPECT_NO_THROW(verify_nesting(alt));
  EXPECT_NEAR(alt.coarea_tv(), base.coarea_tv(), 1e-12 * base.coarea_tv());
  const SolutionField a = reconstruct(base, {128, 128}), b = reconstruct(alt, {128, 128});
  EXPECT_GT(l1_distance(a, b), 1e-4);

  const auto strict = sweep(brothers_datum(0.7), disk, Anisotropy::euclidean(), 60);
  std::size_t none = 1;
  alternative_family(strict, &none);
  EXPECT_EQ(none, 0u);
}

TEST(Solution, L1DistanceOfDiskIndicators) {
  const auto disk = ConvexDomain::unit_disk();
  const auto one = SolutionField::sample(disk, Anisotropy::euclidean(), {64, 64}, [](Point) { return 1.0; });
  const auto zero = SolutionField::sample(disk, Anisotropy::euclidean(), {64, 64}, [](Point) { return 0.0; });
  // The integral runs over the domain itself, not over the masked cells.
  EXPECT_NEAR(l1_distance(one, zero), kPi, 1e-4);
  EXPECT_NEAR(l1_norm(one), l1_distance(one, zero), 1e-12);
  EXPECT_EQ(l1_distance(one, one), 0.0);
}

TEST(Solution, TraceBandValidated) {
  const auto disk = ConvexDomain::unit_disk();
  const SolutionField u = reconstruct(sweep(brothers_datum(0.0), disk, Anisotropy::euclidean(), 200), {64, 64});
  EXPECT_THROW(trace_check(u, brothers_datum(0.0), 0.0), Error);
  EXPECT_THROW(trace_check(u, brothers_datum(0.0), 1.0), Error);
  EXPECT_LT(trace_check(u, brothers_datum(0.0), 0.005), 0.2);
}
