#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "osmmcl/distance_field.hpp"
#include "osmmcl/error.hpp"
#include "osmmcl/segment_index.hpp"
#include "test_util.hpp"

namespace osmmcl {
namespace {

RoadGraph single_segment_graph(MapPoint a, MapPoint b) {
  return RoadGraph({0.0, 0.0}, {{1, a}, {2, b}}, {Way{1, {1, 2}, "residential"}});
}

TEST(PointSegmentDistance, MatchesOracleOnRandomInputs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const Segment s{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const MapPoint p{u(rng), u(rng)};
    EXPECT_NEAR(point_segment_distance(p, s), testing::oracle_segment_distance(p, s), 1e-9);
  }
}

TEST(BuildDistanceField, PerpendicularDistanceToHorizontalSegment) {
  const RoadGraph g = single_segment_graph({-200.0, 0.0}, {200.0, 0.0});
  // Origin -51 with 2 m cells puts cell centers on even coordinates.
  const DistanceField f = build_distance_field(g, {-51.0, -51.0, 51.0, 51.0});
  ASSERT_EQ(f.width(), 51u);
  const auto iy = static_cast<std::uint32_t>((10.0 - -51.0) / 2.0);
  const MapPoint c = f.cell_center(20, iy);
  EXPECT_DOUBLE_EQ(c.n, 10.0);
  EXPECT_NEAR(f.value(20, iy), 10.0, 1e-12);
}

TEST(BuildDistanceField, CellCenterOnEndpointIsZero) {
  const RoadGraph g = single_segment_graph({0.0, 0.0}, {30.0, 40.0});
  const DistanceField f = build_distance_field(g, {-11.0, -11.0, 11.0, 11.0});
  const MapPoint c = f.cell_center(5, 5);
  ASSERT_EQ(c.e, 0.0);
  ASSERT_EQ(c.n, 0.0);
  EXPECT_EQ(f.value(5, 5), 0.0);
}

TEST(BuildDistanceField, Grid4RandomCellsMatchBruteForce) {
  const RoadGraph g = load_osm_file(testing::fixture("grid4.osm"));
  const DistanceField f = build_distance_field(g, g.bounds().expanded(60.0));
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint32_t> ix(0, f.width() - 1);
  std::uniform_int_distribution<std::uint32_t> iy(0, f.height() - 1);
  for (int i = 0; i < 200; ++i) {
    const auto x = ix(rng);
    const auto y = iy(rng);
    EXPECT_NEAR(f.value(x, y), testing::oracle_nearest(f.cell_center(x, y), g), 1e-6);
  }
}

TEST(BuildDistanceField, ErrorsOnEmptyGraphDegenerateBoundsAndBudget) {
  const RoadGraph empty({0.0, 0.0}, {}, {});
  try {
    build_distance_field(empty, {0.0, 0.0, 10.0, 10.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyMap);
  }
  const RoadGraph g = single_segment_graph({0.0, 0.0}, {10.0, 0.0});
  try {
    build_distance_field(g, {0.0, 0.0, 0.0, 10.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  DistanceFieldOptions opt;
  opt.cell_budget = 99;
  try {
    build_distance_field(g, {0.0, 0.0, 20.0, 20.0}, opt);  // 10 x 10 cells
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kResource);
  }
  opt.cell_budget = 100;
  EXPECT_NO_THROW(build_distance_field(g, {0.0, 0.0, 20.0, 20.0}, opt));
}

class FixtureField : public ::testing::TestWithParam<const char*> {};

TEST_P(FixtureField, InvariantsHold) {
  const RoadGraph g = load_osm_file(testing::fixture(GetParam()));
  const DistanceField f = build_distance_field(g, g.bounds().expanded(50.0));
  const double half_diag = f.cell_size() * std::sqrt(2.0) / 2.0;
  for (std::uint32_t y = 0; y < f.height(); ++y) {
    for (std::uint32_t x = 0; x < f.width(); ++x) {
      const double v = f.value(x, y);
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0);
      if (x + 1 < f.width()) {
        ASSERT_LE(std::abs(v - f.value(x + 1, y)), f.cell_size() * std::sqrt(2.0) + 1e-9);
      }
      if (y + 1 < f.height()) {
        ASSERT_LE(std::abs(v - f.value(x, y + 1)), f.cell_size() * std::sqrt(2.0) + 1e-9);
      }
    }
  }
  // Cells holding a road point are within half a diagonal of it.
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (const auto& s : g.segments()) {
    const MapPoint p = s.a + t(rng) * (s.b - s.a);
    const auto idx = f.cell_index(p);
    ASSERT_GE(idx, 0);
    EXPECT_LE(f.values()[static_cast<std::size_t>(idx)], half_diag + 1e-9);
  }
  // Off-center lookups stay within half a cell diagonal of the exact distance.
  const Rect b = f.bounds();
  std::uniform_real_distribution<double> pe(b.min_e, b.max_e);
  std::uniform_real_distribution<double> pn(b.min_n, b.max_n);
  for (int i = 0; i < 1000; ++i) {
    const MapPoint p{pe(rng), pn(rng)};
    EXPECT_LE(std::abs(f.lookup(p) - testing::oracle_nearest(p, g)), half_diag + 1e-6);
  }
}

INSTANTIATE_TEST_SUITE_P(Maps, FixtureField, ::testing::Values("grid4.osm", "hamlet.osm", "rural_2km2.osm"));

TEST(Lookup, CellCenterOnRoadIsZero) {
  const RoadGraph g = single_segment_graph({-100.0, 0.0}, {100.0, 0.0});
  const DistanceField f = build_distance_field(g, {-11.0, -11.0, 11.0, 11.0});
  EXPECT_NEAR(f.lookup({4.0, 0.0}), 0.0, 1e-12);
}

TEST(Lookup, OutsideAddsDistanceToClampedCell) {
  const RoadGraph g = single_segment_graph({-100.0, 0.0}, {100.0, 0.0});
  // Grid spans n in [5, 25]; the boundary row nearest the road is 6 m away.
  const DistanceField f = build_distance_field(g, {-10.0, 5.0, 10.0, 25.0});
  const MapPoint center = f.cell_center(3, 0);
  ASSERT_NEAR(f.value(3, 0), 6.0, 1e-12);
  const MapPoint p{center.e, center.n - 10.0 - 1.0};  // 10 m beyond the boundary edge
  EXPECT_NEAR(f.lookup(p), 6.0 + 11.0, 1e-12);
  EXPECT_GE(f.lookup(p), 6.0);
  // Corner extrapolation is also finite and additive.
  EXPECT_NEAR(f.lookup({100.0, 100.0}), f.value(f.width() - 1, f.height() - 1) +
                                            distance({100.0, 100.0}, f.cell_center(f.width() - 1, f.height() - 1)),
              1e-9);
}

TEST(Mcdf, HeaderAndValuesRoundTrip) {
  const RoadGraph g = load_osm_file(testing::fixture("grid4.osm"));
  const DistanceField f = build_distance_field(g, g.bounds().expanded(20.0));
  std::stringstream buf;
  write_mcdf(buf, f);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 4 + 4 + 8 * 3 + 4 + 4 + 4 * f.values().size());
  EXPECT_EQ(bytes.substr(0, 4), "MCDF");
  const DistanceField back = read_mcdf(buf);
  EXPECT_EQ(back.origin(), f.origin());
  EXPECT_EQ(back.cell_size(), f.cell_size());
  EXPECT_EQ(back.width(), f.width());
  EXPECT_EQ(back.height(), f.height());
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    EXPECT_EQ(back.values()[i], static_cast<double>(static_cast<float>(f.values()[i])));
  }
}

TEST(Mcdf, RejectsBadMagicAndTruncation) {
  std::stringstream bad("XXXX0000");
  EXPECT_THROW(read_mcdf(bad), Error);
  const RoadGraph g = single_segment_graph({0.0, 0.0}, {10.0, 0.0});
  const DistanceField f = build_distance_field(g, {0.0, 0.0, 10.0, 10.0});
  std::stringstream buf;
  write_mcdf(buf, f);
  std::string bytes = buf.str();
  bytes.resize(bytes.size() - 3);
  std::stringstream truncated(bytes);
  EXPECT_THROW(read_mcdf(truncated), Error);
}

TEST(BuildDistanceField, IdenticalForAnyWorkerCount) {
  const RoadGraph g = load_osm_file(testing::fixture("hamlet.osm"));
  DistanceFieldOptions one;
  DistanceFieldOptions four;
  four.workers = 4;
  const DistanceField a = build_distance_field(g, g.bounds().expanded(30.0), one);
  const DistanceField b = build_distance_field(g, g.bounds().expanded(30.0), four);
  EXPECT_EQ(a.values(), b.values());
}

TEST(SegmentIndex, NearestMatchesLinearScanInsideAndOutsideCoverage) {
  const RoadGraph g = load_osm_file(testing::fixture("hamlet.osm"));
  const SegmentIndex index(g.segments(), g.bounds(), 32.0);
  std::mt19937_64 rng(29);
  const Rect b = g.bounds().expanded(300.0);
  std::uniform_real_distribution<double> pe(b.min_e, b.max_e);
  std::uniform_real_distribution<double> pn(b.min_n, b.max_n);
  for (int i = 0; i < 2000; ++i) {
    const MapPoint p{pe(rng), pn(rng)};
    EXPECT_NEAR(index.nearest_distance(p), testing::oracle_nearest(p, g), 1e-9);
  }
}

TEST(SegmentIndex, SegmentsInIsSortedAndComplete) {
  const RoadGraph g = load_osm_file(testing::fixture("hamlet.osm"));
  const SegmentIndex index(g.segments(), g.bounds(), 32.0);
  const Rect q{-50.0, -50.0, 60.0, 40.0};
  const auto got = index.segments_in(q);
  std::vector<std::uint32_t> expected;
  for (std::uint32_t i = 0; i < g.segments().size(); ++i) {
    const auto& s = g.segments()[i];
    const Rect box{std::min(s.a.e, s.b.e), std::min(s.a.n, s.b.n), std::max(s.a.e, s.b.e), std::max(s.a.n, s.b.n)};
    if (box.max_e >= q.min_e && box.min_e <= q.max_e && box.max_n >= q.min_n && box.min_n <= q.max_n) {
      expected.push_back(i);
    }
  }
  EXPECT_EQ(got, expected);
}

}  // namespace
}  // namespace osmmcl
