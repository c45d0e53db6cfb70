#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "osmmcl/distance_field.hpp"
#include "osmmcl/motion_model.hpp"

namespace osmmcl {

/// One measurement point in the sensor frame: a forward, b left, c = 1 for road.
struct SegmentedPoint {
  double a = 0.0;
  double b = 0.0;
  std::uint8_t c = 0;

  friend bool operator==(const SegmentedPoint&, const SegmentedPoint&) = default;
};

enum class CloudProvenance { kSimulated, kBackprojected };

struct SegmentedPointCloud {
  std::vector<SegmentedPoint> points;
  CloudProvenance provenance = CloudProvenance::kSimulated;
};

enum class DistanceFunctionKind { kGaussian, kQuadratic, kExpDecay, kMapliteLinear };

inline constexpr DistanceFunctionKind kAllDistanceFunctionKinds[] = {
    DistanceFunctionKind::kGaussian, DistanceFunctionKind::kQuadratic, DistanceFunctionKind::kExpDecay,
    DistanceFunctionKind::kMapliteLinear};

/// Config names: gaussian, quadratic, exp_decay, maplite_linear.
std::string_view to_string(DistanceFunctionKind kind);
/// Row labels for results tables: Gaussian, Quadratic, Exp. decay, Maplite.
std::string_view display_name(DistanceFunctionKind kind);
DistanceFunctionKind parse_distance_function_kind(std::string_view name);

struct DistanceFunctionSpec {
  DistanceFunctionKind kind = DistanceFunctionKind::kQuadratic;
  double sigma = 10.0;    // gaussian, m
  double tau = 0.1;       // exp_decay, 1/m
  double d_max = 30.0;    // maplite_linear, m
  double epsilon = 1e-6;  // weight floor

  /// Throws Error(kInvalidArgument) naming the offending field.
  void validate() const;
};

/// Road-class kernel before clamping: gaussian exp(-d^2 / 2 sigma^2), quadratic
/// 1 / (d^2 + 1), exp_decay exp(-d tau), maplite_linear max(0, 1 - d / d_max).
double road_weight(const DistanceFunctionSpec& spec, double d);

/// road_weight for c = 1, its complement 1 - road_weight for c = 0. Not clamped.
double unclamped_weight(const DistanceFunctionSpec& spec, double d, std::uint8_t c);

/// unclamped_weight clamped to [epsilon, 1]. Throws Error(kInvalidArgument) for d < 0.
double eval_distance_fn(const DistanceFunctionSpec& spec, double d, std::uint8_t c);

/// Map-frame position of a sensor-frame point seen from pose x.
inline MapPoint to_map_frame(const Pose& x, double cos_t, double sin_t, const SegmentedPoint& p) {
  return {x.e + p.a * cos_t - p.b * sin_t, x.n + p.a * sin_t + p.b * cos_t};
}

/// Sum over points of log eval_distance_fn(spec, field.lookup(point in map frame), c).
/// An empty cloud scores 0.
double score_pose(const Pose& x, const SegmentedPointCloud& z, const DistanceField& field,
                  const DistanceFunctionSpec& spec);

/// score_pose with per-cell log-weights tabulated once for a (field, spec) pair. Scores
/// are bit-identical to score_pose; points outside the grid are evaluated directly.
class PoseScorer {
 public:
  PoseScorer(const DistanceField& field, DistanceFunctionSpec spec);

  [[nodiscard]] double score(const Pose& x, std::span<const SegmentedPoint> points) const;
  [[nodiscard]] double score(const Pose& x, const SegmentedPointCloud& z) const { return score(x, z.points); }

  [[nodiscard]] const DistanceField& field() const { return *field_; }
  [[nodiscard]] const DistanceFunctionSpec& spec() const { return spec_; }
  /// log(epsilon): the smallest possible per-point contribution.
  [[nodiscard]] double floor_log_weight() const { return floor_log_; }

 private:
  const DistanceField* field_;
  DistanceFunctionSpec spec_;
  double floor_log_;
  std::vector<double> log_nonroad_;  // per cell, c = 0
  std::vector<double> log_road_;     // per cell, c = 1
};

/// Keeps at most one point per (voxel, class): the one nearest its voxel center, first
/// occurrence on ties. Output is sorted by voxel (x index, then y index) then class.
SegmentedPointCloud downsample_voxel(const SegmentedPointCloud& z, double voxel);

}  // namespace osmmcl
