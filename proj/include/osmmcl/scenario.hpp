#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "osmmcl/measurement_model.hpp"
#include "osmmcl/motion_model.hpp"
#include "osmmcl/particle_filter.hpp"
#include "osmmcl/road_graph.hpp"
#include "osmmcl/segment_index.hpp"

namespace osmmcl {

struct ScenarioConfig {
  /// Ways to drive in order; consecutive ways must share an endpoint. Empty selects a
  /// seeded random walk over the road graph.
  std::vector<OsmId> route;
  /// Random-walk length when `route` is empty and num_steps is 0.
  double route_length_m = 2000.0;
  /// Number of poses to emit; 0 means as many as fit on the route.
  std::size_t num_steps = 0;
  double speed = 10.0;   // m/s
  double step_dt = 1.0;  // s
  double odom_rate_hz = 10.0;
  double wheelbase = 2.8;  // m

  std::size_t points_per_scan = 200;
  double road_point_lateral_sigma = 2.5;  // m, truncated at 3 sigma
  double nonroad_fraction = 0.4;
  double label_flip_prob = 0.06;
  double sensor_range = 50.0;      // m
  double sensor_fov_deg = 180.0;   // centered on the heading
  double nonroad_min_offset = 5.0; // m from any edge

  double odom_bias = 1.0;         // multiplicative wheel-speed bias
  double odom_speed_sigma = 0.0;  // m/s
  double odom_steer_sigma = 0.0;  // rad

  std::uint64_t seed = 1;

  /// Throws Error(kInvalidArgument) naming the offending field.
  void validate() const;
};

struct GroundTruthTrace {
  std::vector<Pose> poses;
  std::vector<double> times;
  /// odometry[k] covers (times[k-1], times[k]]; odometry[0] is empty.
  std::vector<std::vector<OdometrySample>> odometry;
  /// End time of each odometry sample, parallel to `odometry`.
  std::vector<std::vector<double>> odometry_times;
};

/// Ordered polyline for the configured route. Throws Error(kStructure) when explicit ways
/// do not connect end to end or an id is unknown.
std::vector<MapPoint> build_route(const RoadGraph& graph, const ScenarioConfig& cfg);

/// Constant-speed poses along the route with heading along the current segment, and
/// odometry from inverting the bicycle model at odom_rate_hz with the configured bias
/// and noise.
GroundTruthTrace generate_trajectory(const RoadGraph& graph, const ScenarioConfig& cfg);

/// Draws segmented scans around ground-truth poses.
///
/// Road points (c = 1) lie on edges within sensor range, displaced laterally by a
/// Gaussian truncated at 3 sigma; non-road points (c = 0) are uniform over the sensor
/// footprint at least nonroad_min_offset from every edge. Labels are then flipped
/// independently with label_flip_prob; the flip draws do not depend on the probability.
class ScanSynthesizer {
 public:
  ScanSynthesizer(const RoadGraph& graph, ScenarioConfig cfg);

  [[nodiscard]] SegmentedPointCloud synthesize(const Pose& gt, Rng& rng) const;

 private:
  ScenarioConfig cfg_;
  SegmentIndex index_;
};

SegmentedPointCloud synthesize_scan(const Pose& gt, const RoadGraph& graph, const ScenarioConfig& cfg, Rng& rng);

/// One scan per ground-truth pose, each from Stream::kScan indexed by step.
std::vector<SegmentedPointCloud> synthesize_scans(const RoadGraph& graph, const ScenarioConfig& cfg,
                                                  const GroundTruthTrace& gt, int workers = 1);

/// Trajectory plus one scan per pose (Stream::kScan, indexed by step), with controls from
/// integrate_odometry.
Scenario simulate_scenario(const RoadGraph& graph, const ScenarioConfig& cfg, int workers = 1);

Scenario assemble_scenario(const GroundTruthTrace& gt, std::span<const SegmentedPointCloud> scans,
                           double wheelbase);

/// Replay layout: ground_truth.csv (step,t,e,n,theta), odometry.csv (t,v,delta) and
/// scans/scan_NNNNNN.csv (a,b,c), one per step.
void save_replay(const std::filesystem::path& dir, const GroundTruthTrace& gt,
                 std::span<const SegmentedPointCloud> scans);

struct Replay {
  GroundTruthTrace ground_truth;
  std::vector<SegmentedPointCloud> scans;
};
Replay load_replay(const std::filesystem::path& dir);

void write_segmented_csv(const std::filesystem::path& path, const SegmentedPointCloud& cloud);
SegmentedPointCloud read_segmented_csv(const std::filesystem::path& path);

}  // namespace osmmcl
