#include "osmmcl/measurement_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "osmmcl/error.hpp"

namespace osmmcl {

std::string_view to_string(DistanceFunctionKind kind) {
  switch (kind) {
    case DistanceFunctionKind::kGaussian:
      return "gaussian";
    case DistanceFunctionKind::kQuadratic:
      return "quadratic";
    case DistanceFunctionKind::kExpDecay:
      return "exp_decay";
    case DistanceFunctionKind::kMapliteLinear:
      return "maplite_linear";
  }
  return "unknown";
}

std::string_view display_name(DistanceFunctionKind kind) {
  switch (kind) {
    case DistanceFunctionKind::kGaussian:
      return "Gaussian";
    case DistanceFunctionKind::kQuadratic:
      return "Quadratic";
    case DistanceFunctionKind::kExpDecay:
      return "Exp. decay";
    case DistanceFunctionKind::kMapliteLinear:
      return "Maplite";
  }
  return "unknown";
}

DistanceFunctionKind parse_distance_function_kind(std::string_view name) {
  for (auto kind : kAllDistanceFunctionKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown distance function '" + std::string(name) +
                  "' (expected gaussian, quadratic, exp_decay or maplite_linear)");
}

void DistanceFunctionSpec::validate() const {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "distance_function.sigma must be > 0");
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "distance_function.tau must be > 0");
  if (!(d_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "distance_function.d_max must be > 0");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "distance_function.epsilon must be in (0, 0.5)");
  }
}

double road_weight(const DistanceFunctionSpec& spec, double d) {
  switch (spec.kind) {
    case DistanceFunctionKind::kGaussian:
      return std::exp(-(d * d) / (2.0 * spec.sigma * spec.sigma));
    case DistanceFunctionKind::kQuadratic:
      return 1.0 / (d * d + 1.0);
    case DistanceFunctionKind::kExpDecay:
      return std::exp(-d * spec.tau);
    case DistanceFunctionKind::kMapliteLinear:
      return std::max(0.0, 1.0 - d / spec.d_max);
  }
  return 0.0;
}

double unclamped_weight(const DistanceFunctionSpec& spec, double d, std::uint8_t c) {
  const double road = road_weight(spec, d);
  return c != 0 ? road : 1.0 - road;
}

double eval_distance_fn(const DistanceFunctionSpec& spec, double d, std::uint8_t c) {
  if (!(d >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "distance must be non-negative");
  return std::clamp(unclamped_weight(spec, d, c), spec.epsilon, 1.0);
}

double score_pose(const Pose& x, const SegmentedPointCloud& z, const DistanceField& field,
                  const DistanceFunctionSpec& spec) {
  const double cos_t = std::cos(x.theta);
  const double sin_t = std::sin(x.theta);
  double sum = 0.0;
  for (const auto& p : z.points) {
    sum += std::log(eval_distance_fn(spec, field.lookup(to_map_frame(x, cos_t, sin_t, p)), p.c));
  }
  return sum;
}

PoseScorer::PoseScorer(const DistanceField& field, DistanceFunctionSpec spec)
    : field_(&field), spec_(spec), floor_log_(std::log(spec.epsilon)) {
  spec_.validate();
  const auto& values = field.values();
  log_nonroad_.resize(values.size());
  log_road_.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    log_nonroad_[i] = std::log(eval_distance_fn(spec_, values[i], 0));
    log_road_[i] = std::log(eval_distance_fn(spec_, values[i], 1));
  }
}

double PoseScorer::score(const Pose& x, std::span<const SegmentedPoint> points) const {
  const double cos_t = std::cos(x.theta);
  const double sin_t = std::sin(x.theta);
  double sum = 0.0;
  for (const auto& p : points) {
    const MapPoint m = to_map_frame(x, cos_t, sin_t, p);
    const auto idx = field_->cell_index(m);
    if (idx >= 0) {
      sum += (p.c != 0 ? log_road_ : log_nonroad_)[static_cast<std::size_t>(idx)];
    } else {
      sum += std::log(eval_distance_fn(spec_, field_->lookup_outside(m), p.c));
    }
  }
  return sum;
}

SegmentedPointCloud downsample_voxel(const SegmentedPointCloud& z, double voxel) {
  if (!(voxel > 0.0)) throw Error(ErrorCode::kInvalidArgument, "voxel size must be positive");
  using Key = std::tuple<std::int64_t, std::int64_t, std::uint8_t>;
  struct Best {
    std::size_t index;
    double dist2;
  };
  std::map<Key, Best> cells;
  for (std::size_t i = 0; i < z.points.size(); ++i) {
    const auto& p = z.points[i];
    const double fx = std::floor(p.a / voxel);
    const double fy = std::floor(p.b / voxel);
    const double da = p.a - (fx + 0.5) * voxel;
    const double db = p.b - (fy + 0.5) * voxel;
    const double d2 = da * da + db * db;
    const Key key{static_cast<std::int64_t>(fx), static_cast<std::int64_t>(fy), p.c};
    auto [it, inserted] = cells.try_emplace(key, Best{i, d2});
    if (!inserted && d2 < it->second.dist2) it->second = Best{i, d2};
  }
  SegmentedPointCloud out;
  out.provenance = z.provenance;
  out.points.reserve(cells.size());
  for (const auto& [key, best] : cells) out.points.push_back(z.points[best.index]);
  return out;
}

}  // namespace osmmcl
