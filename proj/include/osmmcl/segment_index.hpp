#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "osmmcl/road_graph.hpp"

namespace osmmcl {

/// Exact Euclidean distance from p to the closed segment s.
double point_segment_distance(MapPoint p, const Segment& s);

/// Segments bucketed into square tiles. A segment is listed in every tile its bounding
/// box overlaps, so a ring search around a query point is exact.
class SegmentIndex {
 public:
  SegmentIndex(std::span<const Segment> segments, Rect coverage, double tile_size);

  /// Distance to the nearest segment. Exact for any p; points outside the coverage
  /// rectangle fall back to a linear scan.
  [[nodiscard]] double nearest_distance(MapPoint p) const;

  /// Indices of segments whose bounding box intersects `query`, ascending, no duplicates.
  [[nodiscard]] std::vector<std::uint32_t> segments_in(const Rect& query) const;

  [[nodiscard]] std::span<const Segment> segments() const { return segments_; }
  [[nodiscard]] const Rect& coverage() const { return coverage_; }

 private:
  [[nodiscard]] std::int64_t tile_x(double e) const;
  [[nodiscard]] std::int64_t tile_y(double n) const;

  std::vector<Segment> segments_;
  Rect coverage_;
  double tile_size_;
  std::int64_t tiles_x_;
  std::int64_t tiles_y_;
  std::vector<std::uint32_t> tile_offsets_;  // CSR layout, tiles_x_ * tiles_y_ + 1 entries
  std::vector<std::uint32_t> tile_segments_;
};

}  // namespace osmmcl
