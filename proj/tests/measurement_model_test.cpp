#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <gtest/gtest.h>

#include "osmmcl/error.hpp"
#include "osmmcl/measurement_model.hpp"
#include "osmmcl/scenario.hpp"
#include "test_util.hpp"

namespace osmmcl {
namespace {

DistanceFunctionSpec spec_of(DistanceFunctionKind kind) {
  DistanceFunctionSpec s;
  s.kind = kind;
  return s;
}

TEST(RoadWeight, KernelExamples) {
  EXPECT_DOUBLE_EQ(road_weight(spec_of(DistanceFunctionKind::kGaussian), 0.0), 1.0);
  EXPECT_NEAR(road_weight(spec_of(DistanceFunctionKind::kGaussian), 10.0), 0.6065306597126334, 1e-15);
  EXPECT_DOUBLE_EQ(road_weight(spec_of(DistanceFunctionKind::kQuadratic), 0.0), 1.0);
  EXPECT_DOUBLE_EQ(road_weight(spec_of(DistanceFunctionKind::kQuadratic), 1.0), 0.5);
  EXPECT_DOUBLE_EQ(road_weight(spec_of(DistanceFunctionKind::kQuadratic), 3.0), 0.1);
  EXPECT_NEAR(road_weight(spec_of(DistanceFunctionKind::kExpDecay), 10.0), 0.36787944117144233, 1e-15);
  EXPECT_DOUBLE_EQ(road_weight(spec_of(DistanceFunctionKind::kMapliteLinear), 15.0), 0.5);
  EXPECT_DOUBLE_EQ(road_weight(spec_of(DistanceFunctionKind::kMapliteLinear), 30.0), 0.0);
  EXPECT_DOUBLE_EQ(road_weight(spec_of(DistanceFunctionKind::kMapliteLinear), 45.0), 0.0);
}

TEST(EvalDistanceFn, NonRoadIsComplementAndClamped) {
  for (auto kind : kAllDistanceFunctionKinds) {
    const auto s = spec_of(kind);
    for (double d : {0.0, 0.5, 2.0, 7.0, 29.0, 100.0}) {
      EXPECT_DOUBLE_EQ(unclamped_weight(s, d, 0), 1.0 - road_weight(s, d));
      const double w0 = eval_distance_fn(s, d, 0);
      const double w1 = eval_distance_fn(s, d, 1);
      EXPECT_GE(w0, s.epsilon);
      EXPECT_LE(w0, 1.0);
      EXPECT_GE(w1, s.epsilon);
      EXPECT_LE(w1, 1.0);
    }
    EXPECT_EQ(eval_distance_fn(s, 0.0, 0), s.epsilon);
    EXPECT_EQ(eval_distance_fn(s, 0.0, 1), 1.0);
  }
  EXPECT_EQ(eval_distance_fn(spec_of(DistanceFunctionKind::kMapliteLinear), 40.0, 1), 1e-6);
}

TEST(EvalDistanceFn, MonotoneInDistance) {
  for (auto kind : kAllDistanceFunctionKinds) {
    const auto s = spec_of(kind);
    double prev_road = 2.0;
    double prev_off = -1.0;
    for (double d = 0.0; d < 200.0; d += 0.25) {
      const double road = eval_distance_fn(s, d, 1);
      const double off = eval_distance_fn(s, d, 0);
      ASSERT_LE(road, prev_road) << to_string(kind) << " d=" << d;
      ASSERT_GE(off, prev_off) << to_string(kind) << " d=" << d;
      prev_road = road;
      prev_off = off;
    }
  }
}

TEST(EvalDistanceFn, RejectsNegativeDistance) {
  EXPECT_THROW(eval_distance_fn(spec_of(DistanceFunctionKind::kQuadratic), -0.1, 1), Error);
}

TEST(DistanceFunctionSpec, ValidateNamesField) {
  DistanceFunctionSpec s;
  s.sigma = 0.0;
  s.kind = DistanceFunctionKind::kGaussian;
  try {
    s.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("sigma"), std::string::npos);
  }
  s = {};
  s.epsilon = 0.0;
  EXPECT_THROW(s.validate(), Error);
}

TEST(DistanceFunctionKind, NamesRoundTrip) {
  for (auto kind : kAllDistanceFunctionKinds) EXPECT_EQ(parse_distance_function_kind(to_string(kind)), kind);
  EXPECT_EQ(display_name(DistanceFunctionKind::kExpDecay), "Exp. decay");
  EXPECT_THROW(parse_distance_function_kind("cubic"), Error);
}

// Independent formula for each kernel, evaluated as a product rather than a log sum.
double oracle_weight(DistanceFunctionKind kind, double d, int c) {
  double w = 0.0;
  switch (kind) {
    case DistanceFunctionKind::kGaussian:
      w = std::exp(-d * d / 200.0);
      break;
    case DistanceFunctionKind::kQuadratic:
      w = 1.0 / (1.0 + d * d);
      break;
    case DistanceFunctionKind::kExpDecay:
      w = std::exp(-0.1 * d);
      break;
    case DistanceFunctionKind::kMapliteLinear:
      w = d >= 30.0 ? 0.0 : 1.0 - d / 30.0;
      break;
  }
  if (c == 0) w = 1.0 - w;
  return std::min(1.0, std::max(1e-6, w));
}

class ScorePoseOracle : public ::testing::TestWithParam<DistanceFunctionKind> {};

TEST_P(ScorePoseOracle, TwelvePointFixtureMatchesDirectProduct) {
  const RoadGraph g = load_osm_file(testing::fixture("grid4.osm"));
  const DistanceField f = build_distance_field(g, g.bounds().expanded(90.0));
  const SegmentedPointCloud z = read_segmented_csv(testing::fixture("segmented_12pt.csv"));
  ASSERT_EQ(z.points.size(), 12u);
  const auto spec = spec_of(GetParam());
  for (const Pose x : {Pose{3.0, -4.0, 0.4}, Pose{-50.0, 20.0, -2.0}, Pose{0.0, 111.0, 3.1}}) {
    double product = 1.0;
    for (const auto& p : z.points) {
      const double e = x.e + p.a * std::cos(x.theta) - p.b * std::sin(x.theta);
      const double n = x.n + p.a * std::sin(x.theta) + p.b * std::cos(x.theta);
      const double cx = std::floor((e - f.origin().e) / f.cell_size());
      const double cy = std::floor((n - f.origin().n) / f.cell_size());
      ASSERT_GE(cx, 0.0);
      ASSERT_LT(cx, f.width());
      ASSERT_GE(cy, 0.0);
      ASSERT_LT(cy, f.height());
      const MapPoint center{f.origin().e + (cx + 0.5) * f.cell_size(), f.origin().n + (cy + 0.5) * f.cell_size()};
      product *= oracle_weight(GetParam(), testing::oracle_nearest(center, g), p.c);
    }
    const double expected = std::log(product);
    EXPECT_NEAR(score_pose(x, z, f, spec), expected, 1e-10 * std::max(1.0, std::abs(expected)));
    EXPECT_EQ(PoseScorer(f, spec).score(x, z), score_pose(x, z, f, spec));
  }
}

INSTANTIATE_TEST_SUITE_P(Kernels, ScorePoseOracle, ::testing::ValuesIn(kAllDistanceFunctionKinds));

TEST(ScorePose, EmptyCloudScoresZero) {
  const RoadGraph g = load_osm_file(testing::fixture("grid4.osm"));
  const DistanceField f = build_distance_field(g, g.bounds().expanded(10.0));
  EXPECT_EQ(score_pose({}, {}, f, {}), 0.0);
  EXPECT_EQ(PoseScorer(f, {}).score(Pose{}, SegmentedPointCloud{}), 0.0);
}

TEST(PoseScorer, BitIdenticalToDirectScoringIncludingOutsidePoints) {
  const RoadGraph g = load_osm_file(testing::fixture("hamlet.osm"));
  const DistanceField f = build_distance_field(g, g.bounds().expanded(20.0));
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> pa(-60.0, 60.0);
  const Rect b = f.bounds().expanded(40.0);
  std::uniform_real_distribution<double> pe(b.min_e, b.max_e);
  std::uniform_real_distribution<double> pn(b.min_n, b.max_n);
  std::uniform_real_distribution<double> pt(-3.14, 3.14);
  SegmentedPointCloud z;
  for (int i = 0; i < 300; ++i) z.points.push_back({pa(rng), pa(rng), static_cast<std::uint8_t>(i % 3 == 0)});
  for (auto kind : kAllDistanceFunctionKinds) {
    const PoseScorer scorer(f, spec_of(kind));
    for (int i = 0; i < 200; ++i) {
      const Pose x{pe(rng), pn(rng), pt(rng)};
      ASSERT_EQ(scorer.score(x, z), score_pose(x, z, f, spec_of(kind)));
    }
  }
}

TEST(ScorePose, TrueRoadPoseBeatsOffsetPose) {
  const RoadGraph g = load_osm_file(testing::fixture("grid4.osm"));
  const DistanceField f = build_distance_field(g, g.bounds().expanded(60.0));
  // Points along the east-west road through the center, seen from the origin heading east.
  SegmentedPointCloud z;
  for (int i = -20; i <= 20; ++i) z.points.push_back({2.0 * i, 0.0, 1});
  for (auto kind : kAllDistanceFunctionKinds) {
    const auto s = spec_of(kind);
    EXPECT_GT(score_pose({0.0, 0.0, 0.0}, z, f, s), score_pose({0.0, 20.0, 0.0}, z, f, s)) << to_string(kind);
  }
}

using VoxelKey = std::tuple<std::int64_t, std::int64_t, int>;

VoxelKey key_of(const SegmentedPoint& p, double v) {
  return {static_cast<std::int64_t>(std::floor(p.a / v)), static_cast<std::int64_t>(std::floor(p.b / v)), p.c};
}

TEST(DownsampleVoxel, OnePointPerOccupiedVoxelAndClass) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  SegmentedPointCloud z;
  for (int i = 0; i < 5000; ++i) z.points.push_back({u(rng), u(rng), static_cast<std::uint8_t>(rng() % 2)});
  const double v = 2.0;
  std::set<VoxelKey> occupied;
  for (const auto& p : z.points) occupied.insert(key_of(p, v));
  const SegmentedPointCloud out = downsample_voxel(z, v);
  ASSERT_EQ(out.points.size(), occupied.size());
  std::set<VoxelKey> seen;
  for (const auto& q : out.points) {
    const VoxelKey k = key_of(q, v);
    ASSERT_TRUE(seen.insert(k).second);
    // The kept point is the one nearest its voxel center.
    const double ca = (std::get<0>(k) + 0.5) * v;
    const double cb = (std::get<1>(k) + 0.5) * v;
    const double dq = std::hypot(q.a - ca, q.b - cb);
    for (const auto& p : z.points) {
      if (key_of(p, v) == k) {
        ASSERT_LE(dq, std::hypot(p.a - ca, p.b - cb));
      }
    }
  }
  EXPECT_TRUE(std::is_sorted(out.points.begin(), out.points.end(),
                             [&](const auto& a, const auto& b) { return key_of(a, v) < key_of(b, v); }));
}

TEST(DownsampleVoxel, Idempotent) {
  const SegmentedPointCloud z = read_segmented_csv(testing::fixture("segmented_12pt.csv"));
  for (double v : {1.0, 2.0, 10.0}) {
    const auto once = downsample_voxel(z, v);
    const auto twice = downsample_voxel(once, v);
    EXPECT_EQ(once.points, twice.points);
  }
}

TEST(DownsampleVoxel, KeepsBothClassesInOneVoxel) {
  SegmentedPointCloud z;
  z.points = {{0.5, 0.5, 1}, {0.6, 0.6, 0}, {1.0, 1.0, 1}};
  const auto out = downsample_voxel(z, 2.0);
  ASSERT_EQ(out.points.size(), 2u);
  EXPECT_EQ(out.points[0], (SegmentedPoint{0.6, 0.6, 0}));
  EXPECT_EQ(out.points[1], (SegmentedPoint{1.0, 1.0, 1}));
  EXPECT_THROW(downsample_voxel(z, 0.0), Error);
}

}  // namespace
}  // namespace osmmcl
