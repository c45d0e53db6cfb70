#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <gtest/gtest.h>

#include "osmmcl/error.hpp"
#include "osmmcl/particle_filter.hpp"
#include "test_util.hpp"

namespace osmmcl {
namespace {

constexpr double kPi = std::numbers::pi;

ParticleSet manual_set(std::vector<Particle> particles) {
  ParticleSet s;
  s.particles = std::move(particles);
  return s;
}

TEST(Initialize, TrackingDiskMeanRadiusIsTwoThirds) {
  const InitSpec spec = InitSpec::tracking({100.0, -50.0, 0.0}, 200.0, 20000);
  const ParticleSet s = initialize(spec, 5);
  ASSERT_EQ(s.particles.size(), 20000u);
  double sum_r = 0.0;
  double max_r = 0.0;
  double sum_cos = 0.0;
  for (const auto& p : s.particles) {
    const double r = std::hypot(p.pose.e - 100.0, p.pose.n + 50.0);
    sum_r += r;
    max_r = std::max(max_r, r);
    sum_cos += std::cos(p.pose.theta);
    EXPECT_EQ(p.log_weight, 0.0);
    EXPECT_GT(p.pose.theta, -kPi);
    EXPECT_LE(p.pose.theta, kPi);
  }
  EXPECT_NEAR(sum_r / 20000.0, 2.0 * 200.0 / 3.0, 0.03 * 2.0 * 200.0 / 3.0);
  EXPECT_LE(max_r, 200.0);
  EXPECT_NEAR(sum_cos / 20000.0, 0.0, 0.03);
}

TEST(Initialize, GlobalStaysInsideArea) {
  const Rect area{-10.0, 5.0, 90.0, 25.0};
  const ParticleSet s = initialize(InitSpec::global(area, 5000), 6);
  double mean_e = 0.0;
  for (const auto& p : s.particles) {
    ASSERT_GE(p.pose.e, area.min_e);
    ASSERT_LE(p.pose.e, area.max_e);
    ASSERT_GE(p.pose.n, area.min_n);
    ASSERT_LE(p.pose.n, area.max_n);
    mean_e += p.pose.e / 5000.0;
  }
  EXPECT_NEAR(mean_e, 40.0, 2.0);
}

TEST(Initialize, RejectsBadSpecs) {
  EXPECT_THROW(initialize(InitSpec::tracking({}, 200.0, 0), 1), Error);
  EXPECT_THROW(initialize(InitSpec::tracking({}, 0.0, 10), 1), Error);
  EXPECT_THROW(initialize(InitSpec::global({0.0, 0.0, 0.0, 10.0}, 10), 1), Error);
  EXPECT_THROW(initialize(InitSpec::tracking({}, 10.0, 10), 1, 0), Error);
}

TEST(WeightedMeanPose, ThreeToOneWeights) {
  const ParticleSet s = manual_set({{{0.0, 0.0, 0.0}, std::log(3.0)}, {{4.0, 0.0, 0.0}, 0.0}});
  const Pose m = weighted_mean_pose(s);
  EXPECT_NEAR(m.e, 1.0, 1e-12);
  EXPECT_NEAR(m.n, 0.0, 1e-12);
}

TEST(WeightedMeanPose, CircularHeadingAcrossBranchCut) {
  const ParticleSet s = manual_set({{{0.0, 0.0, kPi - 0.1}, 0.0}, {{0.0, 0.0, -kPi + 0.1}, 0.0}});
  const Pose m = weighted_mean_pose(s);
  EXPECT_NEAR(std::abs(m.theta), kPi, 1e-9);
}

TEST(WeightedMeanPose, HugeLogWeightsDoNotOverflow) {
  const ParticleSet s = manual_set({{{2.0, 0.0, 0.0}, -1e5}, {{6.0, 0.0, 0.0}, -1e5}});
  EXPECT_NEAR(weighted_mean_pose(s).e, 4.0, 1e-12);
  const auto w = normalized_weights(s);
  EXPECT_DOUBLE_EQ(w[0], 0.5);
}

TEST(ParticleSpread, UnweightedRms) {
  const ParticleSet s = manual_set({{{3.0, 4.0, 0.0}, 100.0}, {{-3.0, -4.0, 0.0}, 0.0}});
  EXPECT_DOUBLE_EQ(particle_spread(s, {0.0, 0.0}), 5.0);
}

TEST(SystematicResample, CopyCountsFollowWeights) {
  std::vector<Particle> ps;
  for (int i = 0; i < 1000; ++i) {
    ps.push_back({{static_cast<double>(i), 0.0, 0.0}, -std::numeric_limits<double>::infinity()});
  }
  for (int i = 0; i < 4; ++i) ps[static_cast<std::size_t>(i)].log_weight = std::log(i + 1.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ParticleSet s = manual_set(ps);
    Rng rng = make_rng(seed, Stream::kTest);
    EXPECT_TRUE(systematic_resample(s, rng));
    std::map<int, int> copies;
    for (const auto& p : s.particles) {
      ++copies[static_cast<int>(p.pose.e)];
      EXPECT_EQ(p.log_weight, 0.0);
    }
    ASSERT_EQ(s.particles.size(), 1000u);
    ASSERT_EQ(copies.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(copies[i], 100 * (i + 1), 1) << "seed " << seed;
  }
}

TEST(SystematicResample, UniformWeightsKeepEveryParticleOnce) {
  std::vector<Particle> ps;
  for (int i = 0; i < 777; ++i) ps.push_back({{static_cast<double>(i), 0.0, 0.0}, -3.5});
  ParticleSet s = manual_set(ps);
  Rng rng = make_rng(9, Stream::kTest);
  systematic_resample(s, rng);
  for (int i = 0; i < 777; ++i) EXPECT_EQ(s.particles[static_cast<std::size_t>(i)].pose.e, i);
}

TEST(SystematicResample, PreservesWeightedMeanInExpectation) {
  std::vector<Particle> ps;
  for (int i = 0; i < 500; ++i) ps.push_back({{std::sin(i * 0.7) * 50.0, 0.0, 0.0}, std::cos(i * 1.3)});
  const double before = weighted_mean_pose(manual_set(ps)).e;
  double after = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ParticleSet s = manual_set(ps);
    Rng rng = make_rng(seed, Stream::kTest);
    systematic_resample(s, rng);
    after += weighted_mean_pose(s).e / 100.0;
  }
  EXPECT_NEAR(after, before, 0.5);
}

TEST(SystematicResample, DegenerateWeightsResampleUniformly) {
  std::vector<Particle> ps;
  for (int i = 0; i < 100; ++i) ps.push_back({{static_cast<double>(i), 0.0, 0.0}, i == 0 ? 0.0 : -1e3});
  ParticleSet s = manual_set(ps);
  Rng rng = make_rng(1, Stream::kTest);
  EXPECT_FALSE(systematic_resample(s, rng, true));
  for (int i = 0; i < 100; ++i) EXPECT_EQ(s.particles[static_cast<std::size_t>(i)].pose.e, i);
}

TEST(FirstSustainedBelow, FindsFirstRun) {
  EXPECT_EQ(first_sustained_below({30, 20, 20, 30, 20, 20, 20}, 25.0, 3), 4u);
  EXPECT_EQ(first_sustained_below({30, 20, 20}, 25.0, 3), std::nullopt);
  EXPECT_EQ(first_sustained_below({10, 10, 10}, 25.0, 3), 0u);
}

RoadGraph grid4() { return load_osm_file(testing::fixture("grid4.osm")); }

// Seen from (40, 0) heading east on grid4: the road ahead, the north-south road through
// node 6 where the east-west road ends, and open ground past that T junction and to the
// sides. The dead end breaks the grid's mirror symmetry.
SegmentedPointCloud grid4_scan(const RoadGraph& g) {
  const double junction = g.node(6).e - 40.0;
  SegmentedPointCloud z;
  for (int i = 0; i <= 20; ++i) z.points.push_back({junction * i / 20.0, 0.0, 1});
  for (int i = -10; i <= 10; ++i) z.points.push_back({junction, 3.0 * i, 1});
  for (int i = 0; i < 6; ++i) z.points.push_back({junction + 8.0 + 2.0 * i, 0.0, 0});
  for (int i = 1; i <= 6; ++i) {
    z.points.push_back({5.0 * i, 15.0, 0});
    z.points.push_back({5.0 * i, -15.0, 0});
  }
  return z;
}

TEST(RunScenario, StationaryVehicleIsFound) {
  const RoadGraph g = grid4();
  ASSERT_NEAR(g.node(6).n, 0.0, 1e-9);
  const DistanceField f = build_distance_field(g, g.bounds().expanded(80.0));
  const PoseScorer scorer(f, {});
  Scenario sc;
  const Pose truth{40.0, 0.0, 0.0};
  for (int k = 0; k < 40; ++k) sc.steps.push_back({{}, grid4_scan(g), truth});
  FilterOptions opt;
  opt.resample_interval = 5;
  const Trace t = run_scenario(sc, scorer, InitSpec::tracking({38.0, 2.0, 0.0}, 5.0, 3000), 3, opt);
  ASSERT_EQ(t.records.size(), 40u);
  EXPECT_LT(t.summary.final_error, 3.0);
  EXPECT_LT(std::abs(normalize_angle(t.records.back().estimate.theta)), 0.2);
  ASSERT_TRUE(t.summary.convergence_step.has_value());
  EXPECT_TRUE(t.records[4].resampled);
  EXPECT_FALSE(t.records[5].resampled);
  EXPECT_EQ(t.summary.degenerate_steps, 0u);
}

TEST(RunScenario, EmptyScansDeadReckon) {
  const RoadGraph g = grid4();
  const DistanceField f = build_distance_field(g, g.bounds().expanded(10.0));
  const PoseScorer scorer(f, {});
  Scenario sc;
  for (int k = 0; k < 10; ++k) sc.steps.push_back({{2.0, 0.0, kPi / 2}, {}, {}});
  FilterOptions opt;
  opt.noise = {0.0, 0.0};
  const Trace t = run_scenario(sc, scorer, InitSpec::tracking({0.0, 0.0, 0.0}, 1.0, 1), 1, opt);
  // A single noise-free particle follows the control exactly, around a square of side 2.
  Pose p{t.records[0].estimate};
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    const Pose expected = apply_control(p, {2.0, 0.0, kPi / 2});
    EXPECT_NEAR(t.records[k].estimate.e, expected.e, 1e-6);
    EXPECT_NEAR(t.records[k].estimate.n, expected.n, 1e-6);
    p = t.records[k].estimate;
    EXPECT_LT(t.records[k].spread_m, 1e-6);
  }
}

TEST(RunScenario, IdenticalForAnyWorkerCount) {
  const RoadGraph g = grid4();
  const DistanceField f = build_distance_field(g, g.bounds().expanded(80.0));
  const PoseScorer scorer(f, {});
  Scenario sc;
  for (int k = 0; k < 25; ++k) sc.steps.push_back({{0.5, 0.0, 0.0}, grid4_scan(g), {40.0, 0.0, 0.0}});
  const InitSpec init = InitSpec::tracking({30.0, 0.0, 0.0}, 30.0, 3000);
  FilterOptions one;
  FilterOptions three;
  three.workers = 3;
  const Trace a = run_scenario(sc, scorer, init, 11, one);
  const Trace b = run_scenario(sc, scorer, init, 11, three);
  const Trace c = run_scenario(sc, scorer, init, 11, one);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].estimate, b.records[k].estimate);
    EXPECT_EQ(a.records[k].spread_m, b.records[k].spread_m);
    EXPECT_EQ(a.records[k].estimate, c.records[k].estimate);
  }
  const Trace d = run_scenario(sc, scorer, init, 12, one);
  EXPECT_NE(a.records.back().estimate, d.records.back().estimate);
}

TEST(RunScenario, EmptyScenarioIsInvalid) {
  const RoadGraph g = grid4();
  const DistanceField f = build_distance_field(g, g.bounds());
  try {
    run_scenario({}, PoseScorer(f, {}), InitSpec::tracking({}, 10.0, 10), 1, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Step, AllFloorScoresAreFlaggedDegenerate) {
  const RoadGraph g = grid4();
  const DistanceField f = build_distance_field(g, g.bounds());
  DistanceFunctionSpec spec;
  spec.kind = DistanceFunctionKind::kMapliteLinear;
  const PoseScorer scorer(f, spec);
  ParticleSet s = manual_set({{{5000.0, 5000.0, 0.0}, 0.0}, {{-5000.0, 4000.0, 1.0}, 0.0}});
  s.resample_interval = 1;
  SegmentedPointCloud z;
  z.points = {{1.0, 0.0, 1}, {2.0, 0.0, 1}};
  const StepResult r = step(s, {}, z, scorer, {});
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(r.resampled);
  EXPECT_EQ(s.particles.size(), 2u);
  EXPECT_NE(s.particles[0].pose.e, s.particles[1].pose.e);
}

}  // namespace
}  // namespace osmmcl
