#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lgp/decompose.hpp"
#include "support.hpp"

using namespace lgp;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_inside(const SolutionField& f) {
  double worst = 0.0;
  for (std::size_t k = 0; k < f.values().size(); ++k)
    if (f.mask()[k]) worst = std::max(worst, std::abs(f.values()[k]));
  return worst;
}

}  // namespace

TEST(RegionTree, GraphOnlyPathSums) {
  const auto tree = RegionTree::make(3, {{0, 1, 1.0, 0}, {1, 2, 2.0, 1}});
  EXPECT_EQ(tree.path_sums(), (std::vector<double>{0.0, 1.0, 3.0}));
  EXPECT_EQ(tree.rerooted(1).path_sums(), (std::vector<double>{-1.0, 0.0, 2.0}));
  EXPECT_EQ(tree.rerooted(2).path_sums(), (std::vector<double>{-3.0, -2.0, 0.0}));
  EXPECT_FALSE(tree.has_geometry());
  EXPECT_THROW(tree.rerooted(3), Error);
}

TEST(RegionTree, CyclesAndForestsRejected) {
  try {
    RegionTree::make(3, {{0, 1, 1.0, 0}, {1, 2, 1.0, 1}, {2, 0, 1.0, 2}});
    FAIL() << "cycle accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invariant);
    EXPECT_STREQ(e.what(), "non-tree adjacency");
  }
  EXPECT_THROW(RegionTree::make(3, {{0, 1, 1.0, 0}}), Error);
  EXPECT_THROW(RegionTree::make(2, {{0, 5, 1.0, 0}}), Error);
  EXPECT_NO_THROW(RegionTree::make(1, {}));
}

TEST(RegionTree, SingleChordGivesTwoRegions) {
  const auto disk = ConvexDomain::unit_disk();
  // Chord along x = 0 running upward: the left half is the high side.
  const auto tree = RegionTree::from_separators(disk, Anisotropy::euclidean(), {64, 64},
                                                {Separator::chord(disk, -kPi / 2, kPi / 2)}, {0.7});
  ASSERT_EQ(tree.region_count(), 2u);
  ASSERT_EQ(tree.edges().size(), 1u);
  EXPECT_EQ(tree.edges()[0].weight, 0.7);
  const auto uj = jump_part(tree);
  EXPECT_NEAR(uj.value_at({-0.5, 0.1}) - uj.value_at({0.5, 0.1}), 0.7, 1e-15);
  EXPECT_EQ(tree.region_of({-0.5, 0.0}), tree.edges()[0].high);
  EXPECT_EQ(tree.region_of({0.5, 0.0}), tree.edges()[0].low);
}

TEST(RegionTree, ParallelChordsFormAChain) {
  const auto disk = ConvexDomain::unit_disk();
  const double a = std::acos(0.3);
  // x = 0.3 and x = -0.3, both running upward; high sides to the left.
  std::vector<Separator> seps{Separator::chord(disk, -a, a), Separator::chord(disk, -(kPi - a), kPi - a)};
  const auto tree = RegionTree::from_separators(disk, Anisotropy::euclidean(), {96, 96}, seps, {1.0, 2.0});
  ASSERT_EQ(tree.region_count(), 3u);
  const std::size_t right = tree.region_of({0.8, 0}), middle = tree.region_of({0, 0}), left = tree.region_of({-0.8, 0});
  EXPECT_EQ(tree.root(), middle);
  const auto sums = tree.rerooted(right).path_sums();
  EXPECT_NEAR(sums[right], 0.0, 1e-15);
  EXPECT_NEAR(sums[middle], 1.0, 1e-15);
  EXPECT_NEAR(sums[left], 3.0, 1e-15);
}

TEST(RegionTree, RerootingShiftsByAConstant) {
  test::Rng rng(21);
  const auto disk = ConvexDomain::unit_disk();
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = test::random_synthetic(rng, disk, 3 + trial % 5, 0.05);
    const auto tree = RegionTree::from_separators(disk, Anisotropy::euclidean(), {64, 64}, inst.separators, inst.jumps);
    EXPECT_EQ(tree.region_count(), inst.separators.size() + 1);
    for (std::size_t r = 0; r < tree.region_count(); ++r) {
      const auto a = jump_part(tree), b = jump_part(tree.rerooted(r));
      EXPECT_LT(test::difference_spread(a, b), 1e-12);
    }
  }
}

TEST(Decomposition, SyntheticFieldSplitsExactly) {
  test::Rng rng(8);
  const auto disk = ConvexDomain::unit_disk();
  const GridSpec grid{128, 128};
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = test::random_synthetic(rng, disk, 1 + trial, 4.0 * 2.0 / 128.0);
    const auto tree = RegionTree::from_separators(disk, Anisotropy::euclidean(), grid, inst.separators, inst.jumps);
    const auto uj = jump_part(tree);
    Point reference{};
    for (std::size_t k = 0; k < uj.values().size(); ++k)
      if (uj.mask()[k] && tree.cell_region(k) == tree.root()) {
        reference = uj.cell_center(k % grid.width, k / grid.width);
        break;
      }
    const auto u = SolutionField::sample(disk, Anisotropy::euclidean(), grid, [&](Point x) {
      return test::bump_value(inst, x) + test::jump_oracle(inst, x, reference);
    });
    const auto uc = continuous_part(u, tree);
    for (std::size_t k = 0; k < u.values().size(); ++k) {
      if (!u.mask()[k]) continue;
      const Point x = u.cell_center(k % grid.width, k / grid.width);
      EXPECT_NEAR(uj.values()[k], test::jump_oracle(inst, x, reference), 1e-12);
      EXPECT_NEAR(uc.values()[k], test::bump_value(inst, x), 1e-12);
    }
  }
}

TEST(Decomposition, ResidualJumpDetected) {
  const auto disk = ConvexDomain::unit_disk();
  const GridSpec grid{96, 96};
  const auto tree = RegionTree::from_separators(disk, Anisotropy::euclidean(), grid,
                                                {Separator::chord(disk, -kPi / 2, kPi / 2)}, {0.5});
  // The true jump is 1.5; a tree that explains only 0.5 leaves a jump behind.
  const auto u = SolutionField::sample(disk, Anisotropy::euclidean(), grid, [](Point x) { return x.x < 0 ? 1.5 : 0.0; });
  try {
    continuous_part(u, tree);
    FAIL() << "residual jump not detected";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "decomposition incomplete");
  }
}

TEST(Decomposition, ContinuousSolutionHasOneRegion) {
  const auto disk = ConvexDomain::unit_disk();
  const auto u = reconstruct(sweep(brothers_datum(0.0), disk, Anisotropy::euclidean(), 100), {96, 96});
  const auto tree = build_region_tree(u);
  EXPECT_EQ(tree.region_count(), 1u);
  EXPECT_TRUE(tree.edges().empty());
  EXPECT_EQ(max_abs_inside(jump_part(tree)), 0.0);
  const auto uc = continuous_part(u, tree);
  EXPECT_EQ(uc.values(), u.values());
}

TEST(Decomposition, PlateauDatumIsPureJump) {
  const auto disk = ConvexDomain::unit_disk();
  const auto f = BoundaryDatum::piecewise_constant({{0.5, 1.5, 1.0}, {3.0, 4.5, 2.0}}, 0.0);
  const auto family = sweep(f, disk, Anisotropy::euclidean(), 100);
  const auto u = reconstruct(family, {128, 128});
  const auto tree = build_region_tree(u);
  ASSERT_EQ(tree.region_count(), 3u);
  std::vector<double> weights;
  for (const auto& e : tree.edges()) weights.push_back(e.weight);
  std::sort(weights.begin(), weights.end());
  // Each cap carries the highest kept level whose region contains it.
  EXPECT_NEAR(weights[0], 0.99, 1e-12);
  EXPECT_NEAR(weights[1], 1.99, 1e-12);
  const auto uj = jump_part(tree);
  const auto uc = continuous_part(u, tree);
  EXPECT_LT(max_abs_inside(uc), 1e-12);
  EXPECT_NEAR(uj.value_at(disk.point(1.0) * 0.99), 0.99, 1e-12);
  EXPECT_NEAR(uj.value_at(disk.point(3.75) * 0.99), 1.99, 1e-12);
}

TEST(Decomposition, ThresholdDropsSmallJumps) {
  const auto disk = ConvexDomain::unit_disk();
  const auto f = BoundaryDatum::piecewise_constant({{0.5, 1.5, 1.0}, {3.0, 4.5, 2.0}}, 0.0);
  const auto u = reconstruct(sweep(f, disk, Anisotropy::euclidean(), 100), {64, 64});
  EXPECT_EQ(build_region_tree(u, 1.5).region_count(), 2u);
  EXPECT_THROW(build_region_tree(u, 0.0), Error);
}

TEST(Decomposition, RasterFieldNeedsFamily) {
  const auto disk = ConvexDomain::unit_disk();
  const auto u = SolutionField::sample(disk, Anisotropy::euclidean(), {64, 64}, [](Point x) { return x.x; });
  try {
    build_region_tree(u);
    FAIL() << "raster field accepted";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "field has no level family");
  }
}
