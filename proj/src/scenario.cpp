#include "osmmcl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "osmmcl/csv.hpp"
#include "osmmcl/error.hpp"
#include "osmmcl/parallel.hpp"

namespace osmmcl {
namespace {

constexpr double kMaxSteer = std::numbers::pi / 2 - 1e-6;
constexpr double kIndexTile = 32.0;
constexpr double kTurnTolerance = 1e-9;  // rad
constexpr double kTurnDuration = 1e-3;   // s
constexpr double kTurnLength = 1e-4;     // m

[[noreturn]] void invalid(const std::string& field, const std::string& rule) {
  throw Error(ErrorCode::kInvalidArgument, "scenario." + field + " " + rule);
}

/// Arc-length parameterized polyline.
class Polyline {
 public:
  explicit Polyline(std::vector<MapPoint> points) : points_(std::move(points)) {
    cumulative_.push_back(0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      cumulative_.push_back(cumulative_.back() + distance(points_[i - 1], points_[i]));
    }
  }

  [[nodiscard]] double length() const { return cumulative_.back(); }

  /// Position and heading of the segment containing arc length s (the outgoing segment at
  /// vertices, the last segment at the end).
  [[nodiscard]] Pose at(double s) const {
    s = std::clamp(s, 0.0, length());
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t i = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    i = std::min(i, points_.size() - 2);
    const MapPoint a = points_[i];
    const MapPoint b = points_[i + 1];
    const double seg = cumulative_[i + 1] - cumulative_[i];
    const double t = seg > 0.0 ? (s - cumulative_[i]) / seg : 0.0;
    const MapPoint p = a + t * (b - a);
    return {p.e, p.n, normalize_angle(std::atan2(b.n - a.n, b.e - a.e))};
  }

 private:
  std::vector<MapPoint> points_;
  std::vector<double> cumulative_;
};

std::vector<OsmId> random_walk(const RoadGraph& graph, double min_length, std::uint64_t seed) {
  const auto adjacency = node_adjacency(graph);
  std::vector<OsmId> starts;
  for (const auto& [id, next] : adjacency) {
    if (next.size() >= 2) starts.push_back(id);
  }
  if (starts.empty()) {
    for (const auto& [id, next] : adjacency) starts.push_back(id);
  }
  Rng rng = make_rng(seed, Stream::kTrajectory);
  OsmId current = starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng)];
  OsmId previous = current;
  std::vector<OsmId> path{current};
  double length = 0.0;
  while (length < min_length) {
    const auto& next = adjacency.at(current);
    std::vector<OsmId> options;
    for (OsmId n : next) {
      if (n != previous) options.push_back(n);
    }
    if (options.empty()) options = next;  // dead end: turn around
    const OsmId chosen = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    length += distance(graph.node(current), graph.node(chosen));
    previous = current;
    current = chosen;
    path.push_back(current);
  }
  return path;
}

std::vector<OsmId> chain_ways(const RoadGraph& graph, const std::vector<OsmId>& route) {
  std::vector<OsmId> path;
  for (std::size_t k = 0; k < route.size(); ++k) {
    const Way* way = graph.find_way(route[k]);
    if (way == nullptr) {
      throw Error(ErrorCode::kStructure, "route way " + std::to_string(route[k]) + " is not in the road graph");
    }
    std::vector<OsmId> nodes = way->node_ids;
    if (path.empty()) {
      path = nodes;
      continue;
    }
    if (k == 1 && path.front() != path.back() && (nodes.front() == path.front() || nodes.back() == path.front())) {
      std::reverse(path.begin(), path.end());
    }
    if (nodes.back() == path.back()) std::reverse(nodes.begin(), nodes.end());
    if (nodes.front() != path.back()) {
      throw Error(ErrorCode::kStructure, "route is disconnected: way " + std::to_string(route[k]) +
                                             " does not start where way " + std::to_string(route[k - 1]) + " ends");
    }
    path.insert(path.end(), nodes.begin() + 1, nodes.end());
  }
  return path;
}

double distance_to_segments(MapPoint p, const SegmentIndex& index, const std::vector<std::uint32_t>& ids) {
  double best = std::numeric_limits<double>::infinity();
  for (auto id : ids) best = std::min(best, point_segment_distance(p, index.segments()[id]));
  return best;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(speed > 0.0)) invalid("speed", "must be > 0");
  if (!(step_dt > 0.0)) invalid("step_dt", "must be > 0");
  if (!(odom_rate_hz > 0.0)) invalid("odom_rate_hz", "must be > 0");
  if (!(wheelbase > 0.0)) invalid("wheelbase", "must be > 0");
  if (!(route_length_m > 0.0)) invalid("route_length_m", "must be > 0");
  if (!(road_point_lateral_sigma >= 0.0)) invalid("road_point_lateral_sigma", "must be >= 0");
  if (!(nonroad_fraction >= 0.0 && nonroad_fraction <= 1.0)) invalid("nonroad_fraction", "must be in [0, 1]");
  if (!(label_flip_prob >= 0.0 && label_flip_prob <= 1.0)) invalid("label_flip_prob", "must be in [0, 1]");
  if (!(sensor_range > 0.0)) invalid("sensor_range", "must be > 0");
  if (!(sensor_fov_deg > 0.0 && sensor_fov_deg <= 360.0)) invalid("sensor_fov_deg", "must be in (0, 360]");
  if (!(nonroad_min_offset >= 0.0)) invalid("nonroad_min_offset", "must be >= 0");
  if (!(odom_bias > 0.0)) invalid("odom_bias", "must be > 0");
  if (!(odom_speed_sigma >= 0.0)) invalid("odom_speed_sigma", "must be >= 0");
  if (!(odom_steer_sigma >= 0.0)) invalid("odom_steer_sigma", "must be >= 0");
}

std::vector<MapPoint> build_route(const RoadGraph& graph, const ScenarioConfig& cfg) {
  std::vector<OsmId> nodes;
  if (cfg.route.empty()) {
    const double needed = cfg.num_steps > 0 ? static_cast<double>(cfg.num_steps - 1) * cfg.speed * cfg.step_dt
                                            : cfg.route_length_m;
    nodes = random_walk(graph, needed, cfg.seed);
  } else {
    nodes = chain_ways(graph, cfg.route);
  }
  std::vector<MapPoint> points;
  points.reserve(nodes.size());
  for (OsmId id : nodes) points.push_back(graph.node(id));
  if (points.size() < 2) throw Error(ErrorCode::kStructure, "route has fewer than two nodes");
  return points;
}

GroundTruthTrace generate_trajectory(const RoadGraph& graph, const ScenarioConfig& cfg) {
  cfg.validate();
  const Polyline route(build_route(graph, cfg));
  const double stride = cfg.speed * cfg.step_dt;
  std::size_t count = static_cast<std::size_t>(std::floor(route.length() / stride + 1e-9)) + 1;
  if (cfg.num_steps > 0) {
    if (cfg.num_steps > count) {
      throw Error(ErrorCode::kStructure, "route of " + std::to_string(route.length()) + " m is too short for " +
                                             std::to_string(cfg.num_steps) + " steps");
    }
    count = cfg.num_steps;
  }

  const auto substeps = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.step_dt * cfg.odom_rate_hz)));
  const double sub_dt = cfg.step_dt / static_cast<double>(substeps);
  const double sub_len = cfg.speed * sub_dt;

  GroundTruthTrace gt;
  gt.poses.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    gt.poses.push_back(route.at(static_cast<double>(k) * stride));
    gt.times.push_back(static_cast<double>(k) * cfg.step_dt);
  }
  gt.odometry.resize(count);
  gt.odometry_times.resize(count);
  for (std::size_t k = 1; k < count; ++k) {
    Rng rng = make_rng(cfg.seed, Stream::kOdometry, k);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double s0 = static_cast<double>(k - 1) * stride;
    double heading = gt.poses[k - 1].theta;
    MapPoint from{gt.poses[k - 1].e, gt.poses[k - 1].n};
    double t_prev = gt.times[k - 1];
    auto emit = [&](double length, double turn, double t) {
      const double dt = t - t_prev;
      const double v = length / dt;
      double delta = v > 0.0 ? std::atan(turn / dt * cfg.wheelbase / v) : 0.0;
      OdometrySample sample;
      sample.dt = dt;
      sample.v = v * cfg.odom_bias + cfg.odom_speed_sigma * unit(rng);
      delta += cfg.odom_steer_sigma * unit(rng);
      sample.delta = std::clamp(delta, -kMaxSteer, kMaxSteer);
      gt.odometry[k].push_back(sample);
      gt.odometry_times[k].push_back(t);
      t_prev = t;
    };
    for (std::size_t j = 0; j < substeps; ++j) {
      const bool last = j + 1 == substeps;
      const Pose to = last ? gt.poses[k] : route.at(s0 + static_cast<double>(j + 1) * sub_len);
      const MapPoint chord{to.e - from.e, to.n - from.n};
      const double length = norm(chord);
      const double chord_heading = length > 0.0 ? std::atan2(chord.n, chord.e) : heading;
      const double t = last ? gt.times[k] : gt.times[k - 1] + static_cast<double>(j + 1) * sub_dt;
      // A pose sitting on a vertex faces the outgoing segment; the final turn onto it is a
      // short sample at full steering lock after the chord.
      const double final_turn = last ? normalize_angle(to.theta - chord_heading) : 0.0;
      if (std::abs(final_turn) > kTurnTolerance) {
        const double t_chord = t - kTurnDuration;
        emit(length, normalize_angle(chord_heading - heading), t_chord);
        emit(kTurnLength, final_turn, t);
      } else {
        emit(length, normalize_angle(chord_heading - heading), t);
      }
      heading = last ? to.theta : chord_heading;
      from = {to.e, to.n};
    }
  }
  return gt;
}

ScanSynthesizer::ScanSynthesizer(const RoadGraph& graph, ScenarioConfig cfg)
    : cfg_(std::move(cfg)), index_(graph.segments(), graph.bounds(), kIndexTile) {
  cfg_.validate();
}

SegmentedPointCloud ScanSynthesizer::synthesize(const Pose& gt, Rng& rng) const {
  const double range = cfg_.sensor_range;
  const double half_fov = 0.5 * cfg_.sensor_fov_deg * std::numbers::pi / 180.0;
  const double sigma = cfg_.road_point_lateral_sigma;
  const double cos_t = std::cos(gt.theta);
  const double sin_t = std::sin(gt.theta);
  const MapPoint origin{gt.e, gt.n};

  const auto to_sensor = [&](MapPoint m) {
    const double de = m.e - gt.e;
    const double dn = m.n - gt.n;
    return SegmentedPoint{cos_t * de + sin_t * dn, -sin_t * de + cos_t * dn, 0};
  };
  const auto in_view = [&](const SegmentedPoint& p) {
    return std::hypot(p.a, p.b) <= range && std::abs(std::atan2(p.b, p.a)) <= half_fov;
  };

  const double reach = range + 3.0 * sigma + cfg_.nonroad_min_offset;
  std::vector<std::uint32_t> nearby;
  for (auto id : index_.segments_in({gt.e - reach, gt.n - reach, gt.e + reach, gt.n + reach})) {
    if (point_segment_distance(origin, index_.segments()[id]) <= range) nearby.push_back(id);
  }
  std::vector<double> cumulative;
  for (auto id : nearby) cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) +
                                              index_.segments()[id].length());

  const auto nonroad_count =
      static_cast<std::size_t>(std::lround(static_cast<double>(cfg_.points_per_scan) * cfg_.nonroad_fraction));
  const std::size_t road_count = cfg_.points_per_scan - nonroad_count;

  SegmentedPointCloud cloud;
  cloud.provenance = CloudProvenance::kSimulated;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  if (!nearby.empty()) {
    const std::size_t max_tries = 50 * road_count + 50;
    for (std::size_t tries = 0; cloud.points.size() < road_count && tries < max_tries; ++tries) {
      const double pick = unit(rng) * cumulative.back();
      const auto k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                              cumulative.begin());
      const Segment& s = index_.segments()[nearby[std::min(k, nearby.size() - 1)]];
      const double t = unit(rng);
      double lateral = 0.0;
      do {
        lateral = sigma * normal(rng);
      } while (std::abs(lateral) > 3.0 * sigma);
      const MapPoint dir = (1.0 / s.length()) * (s.b - s.a);
      const MapPoint m = s.a + t * (s.b - s.a) + lateral * MapPoint{-dir.n, dir.e};
      SegmentedPoint p = to_sensor(m);
      if (!in_view(p)) continue;
      p.c = 1;
      cloud.points.push_back(p);
    }
  }

  const std::size_t target = cloud.points.size() + nonroad_count;
  const std::size_t max_tries = 50 * nonroad_count + 50;
  for (std::size_t tries = 0; cloud.points.size() < target && tries < max_tries; ++tries) {
    const double r = range * std::sqrt(unit(rng));
    const double a = gt.theta + half_fov * (2.0 * unit(rng) - 1.0);
    const MapPoint m{gt.e + r * std::cos(a), gt.n + r * std::sin(a)};
    if (distance_to_segments(m, index_, nearby) < cfg_.nonroad_min_offset) continue;
    SegmentedPoint p = to_sensor(m);
    if (!in_view(p)) continue;
    p.c = 0;
    cloud.points.push_back(p);
  }

  for (auto& p : cloud.points) {
    if (unit(rng) < cfg_.label_flip_prob) p.c = p.c != 0 ? 0 : 1;
  }
  return cloud;
}

SegmentedPointCloud synthesize_scan(const Pose& gt, const RoadGraph& graph, const ScenarioConfig& cfg, Rng& rng) {
  return ScanSynthesizer(graph, cfg).synthesize(gt, rng);
}

Scenario assemble_scenario(const GroundTruthTrace& gt, std::span<const SegmentedPointCloud> scans, double wheelbase) {
  if (scans.size() != gt.poses.size() || gt.odometry.size() != gt.poses.size()) {
    throw Error(ErrorCode::kInvalidArgument, "scans, odometry and ground truth differ in length");
  }
  Scenario scenario;
  scenario.steps.reserve(gt.poses.size());
  for (std::size_t k = 0; k < gt.poses.size(); ++k) {
    ScenarioStep st;
    st.control = integrate_odometry(gt.odometry[k], wheelbase);
    st.scan = scans[k];
    st.ground_truth = gt.poses[k];
    scenario.steps.push_back(std::move(st));
  }
  return scenario;
}

std::vector<SegmentedPointCloud> synthesize_scans(const RoadGraph& graph, const ScenarioConfig& cfg,
                                                  const GroundTruthTrace& gt, int workers) {
  const ScanSynthesizer synth(graph, cfg);
  std::vector<SegmentedPointCloud> scans(gt.poses.size());
  parallel_for_blocks(scans.size(), workers, [&](std::size_t k) {
    Rng rng = make_rng(cfg.seed, Stream::kScan, k);
    scans[k] = synth.synthesize(gt.poses[k], rng);
  });
  return scans;
}

Scenario simulate_scenario(const RoadGraph& graph, const ScenarioConfig& cfg, int workers) {
  const GroundTruthTrace gt = generate_trajectory(graph, cfg);
  return assemble_scenario(gt, synthesize_scans(graph, cfg, gt, workers), cfg.wheelbase);
}

void write_segmented_csv(const std::filesystem::path& path, const SegmentedPointCloud& cloud) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << "a,b,c\n";
  for (const auto& p : cloud.points) {
    out << format_double(p.a) << ',' << format_double(p.b) << ',' << static_cast<int>(p.c) << '\n';
  }
}

SegmentedPointCloud read_segmented_csv(const std::filesystem::path& path) {
  const CsvReader csv(path, {"a", "b", "c"});
  SegmentedPointCloud cloud;
  cloud.provenance = CloudProvenance::kSimulated;
  for (const auto& r : csv.rows()) {
    if (r[2] != 0.0 && r[2] != 1.0) throw ParseError(path.string() + ": class label must be 0 or 1", 0, 3);
    cloud.points.push_back({r[0], r[1], static_cast<std::uint8_t>(r[2])});
  }
  return cloud;
}

namespace {

std::filesystem::path scan_path(const std::filesystem::path& dir, std::size_t k) {
  char name[32];
  std::snprintf(name, sizeof(name), "scan_%06zu.csv", k);
  return dir / "scans" / name;
}

}  // namespace

void save_replay(const std::filesystem::path& dir, const GroundTruthTrace& gt,
                 std::span<const SegmentedPointCloud> scans) {
  if (scans.size() != gt.poses.size()) throw Error(ErrorCode::kInvalidArgument, "one scan per pose is required");
  std::filesystem::create_directories(dir / "scans");
  {
    std::ofstream out(dir / "ground_truth.csv", std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "ground_truth.csv").string());
    out << "step,t,e,n,theta\n";
    for (std::size_t k = 0; k < gt.poses.size(); ++k) {
      const auto& p = gt.poses[k];
      out << k << ',' << format_double(gt.times[k]) << ',' << format_double(p.e) << ',' << format_double(p.n)
          << ',' << format_double(p.theta) << '\n';
    }
  }
  {
    std::ofstream out(dir / "odometry.csv", std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "odometry.csv").string());
    out << "t,v,delta\n";
    for (std::size_t k = 1; k < gt.odometry.size(); ++k) {
      for (std::size_t j = 0; j < gt.odometry[k].size(); ++j) {
        const auto& s = gt.odometry[k][j];
        out << format_double(gt.odometry_times[k][j]) << ',' << format_double(s.v) << ','
            << format_double(s.delta) << '\n';
      }
    }
  }
  for (std::size_t k = 0; k < scans.size(); ++k) write_segmented_csv(scan_path(dir, k), scans[k]);
}

Replay load_replay(const std::filesystem::path& dir) {
  Replay replay;
  auto& gt = replay.ground_truth;
  const CsvReader truth(dir / "ground_truth.csv", {"step", "t", "e", "n", "theta"});
  for (std::size_t k = 0; k < truth.rows().size(); ++k) {
    const auto& r = truth.rows()[k];
    if (r[0] != static_cast<double>(k)) {
      throw ParseError((dir / "ground_truth.csv").string() + ": steps must be 0, 1, 2, ...", k + 2, 1);
    }
    gt.times.push_back(r[1]);
    gt.poses.push_back({r[2], r[3], normalize_angle(r[4])});
  }
  if (gt.poses.empty()) throw Error(ErrorCode::kInvalidArgument, "replay has no ground-truth steps");

  gt.odometry.resize(gt.poses.size());
  gt.odometry_times.resize(gt.poses.size());
  const CsvReader odo(dir / "odometry.csv", {"t", "v", "delta"});
  std::size_t k = 1;
  double t_prev = gt.times.front();
  for (const auto& r : odo.rows()) {
    const double t = r[0];
    while (k < gt.times.size() && t > gt.times[k]) ++k;
    if (k >= gt.times.size() || !(t > t_prev)) {
      throw Error(ErrorCode::kInvalidArgument, "odometry timestamp " + format_double(t) +
                                                   " is outside the ground-truth time range or not increasing");
    }
    gt.odometry[k].push_back({r[1], r[2], t - t_prev});
    gt.odometry_times[k].push_back(t);
    t_prev = t;
  }

  for (std::size_t s = 0; s < gt.poses.size(); ++s) {
    replay.scans.push_back(read_segmented_csv(scan_path(dir, s)));
  }
  return replay;
}

}  // namespace osmmcl
