#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "osmmcl/road_graph.hpp"

namespace osmmcl {

struct DistanceFieldOptions {
  double cell_size = 2.0;
  std::uint64_t cell_budget = 100'000'000;
  int workers = 1;
};

/// Dense grid of distances (meters) from each cell center to the nearest road segment.
///
/// Cell (ix, iy) spans [origin + ix*cell, origin + (ix+1)*cell) along each axis and is
/// stored row-major (iy * width + ix).
class DistanceField {
 public:
  DistanceField(MapPoint origin, double cell_size, std::uint32_t width, std::uint32_t height,
                std::vector<double> values);

  [[nodiscard]] MapPoint origin() const { return origin_; }
  [[nodiscard]] double cell_size() const { return cell_size_; }
  [[nodiscard]] std::uint32_t width() const { return width_; }
  [[nodiscard]] std::uint32_t height() const { return height_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] Rect bounds() const;

  [[nodiscard]] double value(std::uint32_t ix, std::uint32_t iy) const {
    return values_[static_cast<std::size_t>(iy) * width_ + ix];
  }
  [[nodiscard]] MapPoint cell_center(std::uint32_t ix, std::uint32_t iy) const {
    return {origin_.e + (ix + 0.5) * cell_size_, origin_.n + (iy + 0.5) * cell_size_};
  }

  /// Row-major index of the cell containing p, or -1 when p is outside the grid.
  [[nodiscard]] std::int64_t cell_index(MapPoint p) const {
    const double fx = (p.e - origin_.e) * inv_cell_;
    const double fy = (p.n - origin_.n) * inv_cell_;
    if (!(fx >= 0.0 && fy >= 0.0 && fx < width_ && fy < height_)) return -1;
    return static_cast<std::int64_t>(fy) * width_ + static_cast<std::int64_t>(fx);
  }

  /// Nearest-cell value inside the grid. Outside, the clamped boundary cell's value plus
  /// the distance from p to that cell's center.
  [[nodiscard]] double lookup(MapPoint p) const {
    const auto idx = cell_index(p);
    if (idx >= 0) return values_[static_cast<std::size_t>(idx)];
    return lookup_outside(p);
  }

  [[nodiscard]] double lookup_outside(MapPoint p) const;

 private:
  MapPoint origin_;
  double cell_size_;
  double inv_cell_;
  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<double> values_;
};

/// Exact point-to-segment distance at every cell center of a grid covering `bounds`.
/// Throws Error(kEmptyMap) for a graph without segments, Error(kInvalidArgument) for
/// degenerate bounds or cell size, Error(kResource) when the grid exceeds the cell budget.
DistanceField build_distance_field(const RoadGraph& graph, const Rect& bounds,
                                   const DistanceFieldOptions& options = {});

/// MCDF little-endian serialization: "MCDF", u32 version, f64 origin e/n, f64 cell size,
/// u32 width, u32 height, then width*height f32 values row-major. Values round-trip at
/// single precision.
inline constexpr std::uint32_t kMcdfVersion = 1;
void write_mcdf(std::ostream& out, const DistanceField& field);
DistanceField read_mcdf(std::istream& in);
void write_mcdf_file(const std::filesystem::path& path, const DistanceField& field);
DistanceField read_mcdf_file(const std::filesystem::path& path);

}  // namespace osmmcl
