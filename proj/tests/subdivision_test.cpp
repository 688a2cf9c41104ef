#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "sroi/subdivision.hpp"
#include "support/oracles.hpp"
#include "support/shapes.hpp"

namespace sroi {
namespace {

Path straight_path(std::size_t length) {
  Path p;
  for (std::size_t i = 0; i < length; ++i) p.push_back(Coord{static_cast<int>(i), 0});
  return p;
}

std::vector<std::int64_t> areas(const LabelMap& labels, int k) {
  std::vector<std::int64_t> a(static_cast<std::size_t>(k) + 1, 0);
  for (auto v : labels.data()) ++a[v];
  return a;
}

int components_of(const LabelMap& labels, std::uint32_t label) {
  BinaryMask piece(labels.dims(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) piece[i] = labels[i] == label;
  int count = 0;
  testing::flood_fill_components(piece, 4, &count);
  return count;
}

TEST(SampleCutPoints, EvenSpacing) {
  const auto plan = sample_cut_points(straight_path(17), 4);
  ASSERT_EQ(plan.size(), 3u);
  EXPECT_EQ(plan[0].index, 4u);
  EXPECT_EQ(plan[1].index, 8u);
  EXPECT_EQ(plan[2].index, 12u);
  EXPECT_EQ(plan[1].anchor, (Coord{8, 0}));
  EXPECT_EQ(plan[1].normal, (Vector2{2.0, 0.0}));
}

TEST(SampleCutPoints, SingleRegionNeedsNoCuts) {
  EXPECT_TRUE(sample_cut_points(straight_path(5), 1).empty());
  EXPECT_TRUE(sample_cut_points(straight_path(1), 1).empty());
}

TEST(SampleCutPoints, SixteenRegionsOnHundredVoxels) {
  const auto plan = sample_cut_points(straight_path(100), 16);
  ASSERT_EQ(plan.size(), 15u);
  // round(j * 99 / 16) enumerated by hand-checkable integer arithmetic.
  for (std::size_t j = 0; j < plan.size(); ++j) {
    const double exact = static_cast<double>(j + 1) * 99.0 / 16.0;
    EXPECT_EQ(plan[j].index, static_cast<std::size_t>(std::floor(exact + 0.5)));
    EXPECT_NE(plan[j].index, 0u);
    EXPECT_NE(plan[j].index, 99u);
    if (j > 0) {
      EXPECT_GT(plan[j].index, plan[j - 1].index);
    }
  }
}

TEST(SampleCutPoints, TooShort) {
  EXPECT_NO_THROW(sample_cut_points(straight_path(9), 4));
  try {
    sample_cut_points(straight_path(8), 4);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    EXPECT_NE(std::string(e.what()).find("k too large for region"), std::string::npos);
  }
  EXPECT_THROW(sample_cut_points(straight_path(8), 0), Error);
}

TEST(NormalAt, Examples) {
  EXPECT_EQ(normal_at(Path{{0, 0}, {1, 0}, {2, 0}}, 1), (Vector2{2, 0}));
  EXPECT_EQ(normal_at(Path{{0, 0}, {1, 1}, {2, 2}}, 1), (Vector2{2, 2}));
  EXPECT_EQ(normal_at(Path{{0, 0}, {1, 0}, {1, 1}}, 1), (Vector2{1, 1}));
}

TEST(NormalAt, Errors) {
  const Path p{{0, 0}, {1, 0}, {2, 0}};
  EXPECT_THROW(normal_at(p, 0), Error);
  EXPECT_THROW(normal_at(p, 2), Error);
  try {
    normal_at(Path{{0, 0}, {1, 0}, {0, 0}}, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate tangent"), std::string::npos);
  }
}

TEST(CutBand, VerticalColumn) {
  const auto rect = testing::solid_rectangle(8, 4);
  const auto band = cut_band(rect, Coord{4, 1}, Vector2{2, 0});
  const std::vector<Coord> expected{{4, 0}, {4, 1}, {4, 2}, {4, 3}};
  EXPECT_EQ(band, expected);
}

TEST(CutBand, AntiDiagonal) {
  const auto square = testing::solid_rectangle(5, 5);
  const auto band = cut_band(square, Coord{2, 2}, Vector2{1, 1});
  ASSERT_EQ(band.size(), 5u);
  for (const Coord& c : band) EXPECT_EQ(c.x + c.y, 4);
}

TEST(CutBand, StaysInAnchorComponent) {
  // Two blobs side by side in the same rows, separated by empty columns.
  BinaryMask mask(GridDims{20, 6}, 0);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 20; ++x) mask[Coord{x, y}] = x < 8 || x >= 12;
  }
  for (Vector2 n : {Vector2{0, 2}, Vector2{1, 2}, Vector2{2, 1}, Vector2{2, 2}, Vector2{0, 1}}) {
    const auto band = cut_band(mask, Coord{4, 3}, n);
    ASSERT_FALSE(band.empty());
    for (const Coord& c : band) EXPECT_LT(c.x, 8);
  }
}

struct CutTrial {
  BinaryMask mask;
  Coord anchor;
  Vector2 n;
};

// Random anchor at depth >= 3 and a random tangent direction.
CutTrial random_cut(std::mt19937& rng, BinaryMask mask) {
  static const std::vector<Vector2> tangents{{2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2},
                                             {-1, 2}, {-2, 2}, {-2, 1}, {1, 1}, {-1, 1}};
  const auto depth = testing::brute_force_distance(mask);
  std::vector<Coord> deep;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (depth[i] >= 3.0) deep.push_back(coord_of(i, mask.dims()));
  }
  EXPECT_FALSE(deep.empty());
  const Coord anchor = deep[rng() % deep.size()];
  return {std::move(mask), anchor, tangents[rng() % tangents.size()]};
}

std::vector<int> piece_sizes(const CutTrial& t) {
  BinaryMask rest = t.mask;
  for (const Coord& c : cut_band(t.mask, t.anchor, t.n)) rest[c] = 0;
  int count = 0;
  const auto comp = testing::flood_fill_components(rest, 4, &count);
  std::vector<int> sizes(static_cast<std::size_t>(count), 0);
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (rest[i]) ++sizes[static_cast<std::size_t>(comp[i] - 1)];
  }
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

TEST(CutBand, SplitsRectanglesInTwo) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 150; ++trial) {
    BinaryMask mask(GridDims{40, 40}, 0);
    const int w = 6 + static_cast<int>(rng() % 30);
    const int h = 6 + static_cast<int>(rng() % 30);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) mask[Coord{x + 2, y + 2}] = 1;
    }
    EXPECT_EQ(piece_sizes(random_cut(rng, std::move(mask))).size(), 2u) << "trial " << trial;
  }
}

TEST(CutBand, SplitsDisksInTwoUpToBoundaryCrumbs) {
  // Where a slanted digital line leaves a staircase boundary it can strand a
  // single corner voxel. Apart from such crumbs a disk still splits in two.
  std::mt19937 rng(43);
  int crumbs = 0;
  for (int trial = 0; trial < 150; ++trial) {
    BinaryMask mask(GridDims{40, 40}, 0);
    const double r = 4.0 + static_cast<double>(rng() % 15);
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 40; ++x) mask[Coord{x, y}] = std::hypot(x - 20, y - 20) <= r;
    }
    const auto sizes = piece_sizes(random_cut(rng, std::move(mask)));
    ASSERT_GE(sizes.size(), 2u) << "trial " << trial;
    EXPECT_GT(sizes[1], 1) << "trial " << trial;
    for (std::size_t i = 2; i < sizes.size(); ++i) {
      EXPECT_EQ(sizes[i], 1) << "trial " << trial;
      ++crumbs;
    }
  }
  EXPECT_GT(crumbs, 0);  // the caveat is real, not hypothetical
}

TEST(Subdivide, RectangleIntoVerticalBands) {
  const auto rect = testing::solid_rectangle(64, 16);
  const auto c = extract_centerline(rect);
  const auto labels = subdivide(rect, c.path, sample_cut_points(c.path, 4));
  // Each label is a set of full columns; labels increase left to right.
  std::vector<std::set<std::uint32_t>> per_column(64);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 64; ++x) per_column[x].insert(labels[Coord{x, y}]);
  }
  std::vector<int> width(5, 0);
  std::uint32_t last = 1;
  for (int x = 0; x < 64; ++x) {
    ASSERT_EQ(per_column[x].size(), 1u) << "column " << x;
    const auto l = *per_column[x].begin();
    EXPECT_GE(l, last);
    last = l;
    ++width[l];
  }
  for (int l = 1; l <= 4; ++l) {
    EXPECT_GE(width[l], 15);
    EXPECT_LE(width[l], 17);
  }
}

TEST(Subdivide, SingleRegion) {
  std::mt19937 rng(4);
  const auto blob = testing::random_blob(rng, 32);
  const auto c = extract_centerline(blob);
  const auto labels = subdivide(blob, c.path, sample_cut_points(c.path, 1));
  for (std::size_t i = 0; i < blob.size(); ++i) EXPECT_EQ(labels[i], blob[i] ? 1u : 0u);
}

TEST(Subdivide, AnnulusSixteenOrderedConnectedRegions) {
  const auto mask = testing::Annulus{}.mask();
  const auto c = extract_centerline(mask);
  const auto labels = subdivide(mask, c.path, sample_cut_points(c.path, 16));
  const auto a = areas(labels, 16);
  EXPECT_EQ(a[0], static_cast<std::int64_t>(mask.size() - count_true(mask)));
  for (std::uint32_t l = 1; l <= 16; ++l) {
    EXPECT_GT(a[l], 0);
    EXPECT_EQ(components_of(labels, l), 1) << "label " << l;
  }
  std::uint32_t last = 0;
  for (const Coord& p : c.path) {
    EXPECT_GE(labels[p], last);
    last = labels[p];
  }
  EXPECT_EQ(labels[c.path.front()], 1u);
  EXPECT_EQ(labels[c.path.back()], 16u);
}

TEST(Subdivide, RejectsPlanOffThePath) {
  const auto rect = testing::solid_rectangle(30, 6);
  const auto c = extract_centerline(rect);
  auto plan = sample_cut_points(c.path, 3);
  plan[0].anchor = Coord{plan[0].anchor.x, plan[0].anchor.y == 0 ? 1 : 0};
  EXPECT_THROW(subdivide(rect, c.path, plan), Error);
}

TEST(BalanceAreas, AlreadyEqualIsUnchanged) {
  const auto rect = testing::solid_rectangle(12, 3);
  LabelMap labels(rect.dims(), 0u);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 12; ++x) labels[Coord{x, y}] = static_cast<std::uint32_t>(x / 4 + 1);
  }
  const ArrivalField arrival{ScalarField(rect.dims(), 1.0), Coord{0, 0}};
  EXPECT_EQ(balance_areas(labels, 3, arrival), labels);
}

TEST(BalanceAreas, TwoRegionsTenAndSix) {
  LabelMap labels(GridDims{8, 2}, 0u);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 8; ++x) labels[Coord{x, y}] = x < 5 ? 1u : 2u;
  }
  ASSERT_EQ(areas(labels, 2), (std::vector<std::int64_t>{0, 10, 6}));
  ScalarField u(labels.dims(), 0.0);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 8; ++x) u[Coord{x, y}] = 7.0 - x;
  }
  const auto out = balance_areas(labels, 2, ArrivalField{u, Coord{7, 0}});
  EXPECT_EQ(areas(out, 2), (std::vector<std::int64_t>{0, 8, 8}));
  EXPECT_EQ(components_of(out, 1), 1);
  EXPECT_EQ(components_of(out, 2), 1);
}

TEST(BalanceAreas, RemainderIsTrimmedFromLastRegion) {
  // A = 17, k = 4: four regions of 4 voxels and one voxel trimmed.
  LabelMap labels(GridDims{17, 1}, 0u);
  const std::uint32_t layout[17] = {1, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4};
  ScalarField u(labels.dims(), 0.0);
  for (int x = 0; x < 17; ++x) {
    labels[Coord{x, 0}] = layout[x];
    u[Coord{x, 0}] = 16.0 - x;
  }
  const auto out = balance_areas(labels, 4, ArrivalField{u, Coord{16, 0}});
  EXPECT_EQ(areas(out, 4), (std::vector<std::int64_t>{1, 4, 4, 4, 4}));
  for (std::uint32_t l = 1; l <= 4; ++l) EXPECT_EQ(components_of(out, l), 1);
  // The trimmed voxel is region 4's highest-arrival removable voxel.
  std::size_t zeros = 0;
  for (int x = 0; x < 17; ++x) zeros += out[Coord{x, 0}] == 0;
  EXPECT_EQ(zeros, 1u);
}

TEST(BalanceAreas, ReportsFailureWhenNoMoveKeepsDonorConnected) {
  // Region 1 is a 3-voxel bar whose only contact with region 2 is its middle.
  LabelMap labels(GridDims{3, 2}, 0u);
  labels[Coord{0, 0}] = 1;
  labels[Coord{1, 0}] = 1;
  labels[Coord{2, 0}] = 1;
  labels[Coord{1, 1}] = 2;
  const ArrivalField arrival{ScalarField(labels.dims(), 1.0), Coord{1, 1}};
  try {
    balance_areas(labels, 2, arrival);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAlgorithm);
    EXPECT_NE(std::string(e.what()).find("balance failed"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("3 1"), std::string::npos);
  }
}

TEST(BalanceAreas, RejectsBadPreconditions) {
  LabelMap labels(GridDims{4, 1}, 1u);
  const ArrivalField arrival{ScalarField(labels.dims(), 1.0), Coord{0, 0}};
  EXPECT_THROW(balance_areas(labels, 2, arrival), Error);  // label 2 empty
  labels[Coord{1, 0}] = 2;
  EXPECT_THROW(balance_areas(labels, 2, arrival), Error);  // label 1 split
  labels = LabelMap(GridDims{4, 1}, 1u);
  labels[Coord{3, 0}] = 2;
  ArrivalField holes = arrival;
  holes.values[Coord{0, 0}] = kInfinity;
  EXPECT_THROW(balance_areas(labels, 2, holes), Error);
}

TEST(SubdivideEqual, RectangleFourBy256) {
  const auto labels = subdivide_equal(testing::solid_rectangle(64, 16), 4);
  EXPECT_EQ(areas(labels, 4), (std::vector<std::int64_t>{0, 256, 256, 256, 256}));
  EXPECT_EQ(testing::check_equal_partition(testing::solid_rectangle(64, 16), labels, 4), "");
}

TEST(SubdivideEqual, SingleRegionKeepsEverything) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 3; ++trial) {
    const auto blob = testing::random_blob(rng, 40);
    const auto labels = subdivide_equal(blob, 1);
    for (std::size_t i = 0; i < blob.size(); ++i) EXPECT_EQ(labels[i], blob[i] ? 1u : 0u);
  }
  const BinaryMask dot(GridDims{1, 1}, 1);
  EXPECT_EQ(subdivide_equal(dot, 1)[0], 1u);
}

TEST(SubdivideEqual, AnnulusSixteenEqualRegions) {
  const auto mask = testing::Annulus{}.mask();
  const auto labels = subdivide_equal(mask, 16);
  EXPECT_EQ(testing::check_equal_partition(mask, labels, 16), "");
}

TEST(SubdivideEqual, OrderAlongCenterlineAndDeterminism) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 4; ++trial) {
    const auto blob = testing::random_blob(rng, 64);
    const auto result = run_subdivision(blob, 3);
    EXPECT_EQ(testing::check_equal_partition(blob, result.labels, 3), "");
    std::uint32_t last = 0;
    for (const Coord& p : result.centerline.path) {
      const auto l = result.labels[p];
      if (l == 0) continue;  // trimmed
      EXPECT_GE(l, last);
      last = l;
    }
    EXPECT_EQ(subdivide_equal(blob, 3), result.labels);
  }
}

TEST(SubdivideEqual, NoBalanceOptionSkipsBalancing) {
  SubdivisionOptions opts;
  opts.balance = false;
  const auto labels = subdivide_equal(testing::solid_rectangle(64, 16), 4, opts);
  const auto a = areas(labels, 4);
  EXPECT_EQ(a[0], 0);
  EXPECT_NE(a[1], 256);
}

TEST(SubdivideEqual, KTooLarge) {
  const BinaryMask strip(GridDims{9, 1}, 1);
  EXPECT_NO_THROW(subdivide_equal(strip, 4));
  EXPECT_THROW(subdivide_equal(strip, 5), Error);
  EXPECT_THROW(subdivide_equal(strip, 500), Error);
  EXPECT_THROW(subdivide_equal(strip, 0), Error);
}

}  // namespace
}  // namespace sroi
