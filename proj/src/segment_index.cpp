#include "osmmcl/segment_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "osmmcl/error.hpp"

namespace osmmcl {

double point_segment_distance(MapPoint p, const Segment& s) {
  const MapPoint d = s.b - s.a;
  const double len2 = d.e * d.e + d.n * d.n;
  const MapPoint ap = p - s.a;
  if (len2 == 0.0) return norm(ap);
  const double t = std::clamp((ap.e * d.e + ap.n * d.n) / len2, 0.0, 1.0);
  return distance(p, s.a + t * d);
}

SegmentIndex::SegmentIndex(std::span<const Segment> segments, Rect coverage, double tile_size)
    : segments_(segments.begin(), segments.end()), tile_size_(tile_size) {
  if (!(tile_size > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tile size must be positive");
  for (const auto& s : segments_) {
    coverage = coverage.united({std::min(s.a.e, s.b.e), std::min(s.a.n, s.b.n), std::max(s.a.e, s.b.e),
                                std::max(s.a.n, s.b.n)});
  }
  coverage_ = coverage;
  tiles_x_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(coverage_.width() / tile_size_)));
  tiles_y_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(coverage_.height() / tile_size_)));

  const auto num_tiles = static_cast<std::size_t>(tiles_x_ * tiles_y_);
  std::vector<std::uint32_t> counts(num_tiles + 1, 0);
  auto for_each_tile = [&](const Segment& s, auto&& visit) {
    const auto x0 = tile_x(std::min(s.a.e, s.b.e));
    const auto x1 = tile_x(std::max(s.a.e, s.b.e));
    const auto y0 = tile_y(std::min(s.a.n, s.b.n));
    const auto y1 = tile_y(std::max(s.a.n, s.b.n));
    for (auto y = y0; y <= y1; ++y) {
      for (auto x = x0; x <= x1; ++x) visit(static_cast<std::size_t>(y * tiles_x_ + x));
    }
  };
  for (const auto& s : segments_) for_each_tile(s, [&](std::size_t t) { ++counts[t + 1]; });
  for (std::size_t t = 0; t < num_tiles; ++t) counts[t + 1] += counts[t];
  tile_offsets_ = counts;
  tile_segments_.resize(tile_offsets_.back());
  std::vector<std::uint32_t> cursor(tile_offsets_.begin(), tile_offsets_.end() - 1);
  for (std::uint32_t i = 0; i < segments_.size(); ++i) {
    for_each_tile(segments_[i], [&](std::size_t t) { tile_segments_[cursor[t]++] = i; });
  }
}

std::int64_t SegmentIndex::tile_x(double e) const {
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((e - coverage_.min_e) / tile_size_)), 0,
                                  tiles_x_ - 1);
}

std::int64_t SegmentIndex::tile_y(double n) const {
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((n - coverage_.min_n) / tile_size_)), 0,
                                  tiles_y_ - 1);
}

double SegmentIndex::nearest_distance(MapPoint p) const {
  double best = std::numeric_limits<double>::infinity();
  if (!coverage_.contains(p)) {
    for (const auto& s : segments_) best = std::min(best, point_segment_distance(p, s));
    return best;
  }
  const auto cx = tile_x(p.e);
  const auto cy = tile_y(p.n);
  const auto max_ring = std::max({cx, tiles_x_ - 1 - cx, cy, tiles_y_ - 1 - cy});
  auto scan_tile = [&](std::int64_t x, std::int64_t y) {
    if (x < 0 || y < 0 || x >= tiles_x_ || y >= tiles_y_) return;
    const auto t = static_cast<std::size_t>(y * tiles_x_ + x);
    for (auto k = tile_offsets_[t]; k < tile_offsets_[t + 1]; ++k) {
      best = std::min(best, point_segment_distance(p, segments_[tile_segments_[k]]));
    }
  };
  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    if (ring == 0) {
      scan_tile(cx, cy);
    } else {
      for (auto x = cx - ring; x <= cx + ring; ++x) {
        scan_tile(x, cy - ring);
        scan_tile(x, cy + ring);
      }
      for (auto y = cy - ring + 1; y <= cy + ring - 1; ++y) {
        scan_tile(cx - ring, y);
        scan_tile(cx + ring, y);
      }
    }
    // Anything outside rings 0..ring is at least ring full tiles away from p.
    if (best <= static_cast<double>(ring) * tile_size_) break;
  }
  return best;
}

std::vector<std::uint32_t> SegmentIndex::segments_in(const Rect& query) const {
  std::vector<std::uint32_t> out;
  const Rect clipped{std::max(query.min_e, coverage_.min_e), std::max(query.min_n, coverage_.min_n),
                     std::min(query.max_e, coverage_.max_e), std::min(query.max_n, coverage_.max_n)};
  if (clipped.min_e > clipped.max_e || clipped.min_n > clipped.max_n) return out;
  for (auto y = tile_y(clipped.min_n); y <= tile_y(clipped.max_n); ++y) {
    for (auto x = tile_x(clipped.min_e); x <= tile_x(clipped.max_e); ++x) {
      const auto t = static_cast<std::size_t>(y * tiles_x_ + x);
      for (auto k = tile_offsets_[t]; k < tile_offsets_[t + 1]; ++k) {
        const auto& s = segments_[tile_segments_[k]];
        if (std::max(s.a.e, s.b.e) < query.min_e || std::min(s.a.e, s.b.e) > query.max_e ||
            std::max(s.a.n, s.b.n) < query.min_n || std::min(s.a.n, s.b.n) > query.max_n) {
          continue;
        }
        out.push_back(tile_segments_[k]);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace osmmcl
