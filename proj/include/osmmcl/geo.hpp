#pragma once

#include <algorithm>
#include <cmath>

namespace osmmcl {

/// WGS-84 coordinate in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// Local tangent-plane coordinate in meters (east, north) relative to a GeoPoint origin.
struct MapPoint {
  double e = 0.0;
  double n = 0.0;

  friend MapPoint operator+(MapPoint a, MapPoint b) { return {a.e + b.e, a.n + b.n}; }
  friend MapPoint operator-(MapPoint a, MapPoint b) { return {a.e - b.e, a.n - b.n}; }
  friend MapPoint operator*(double s, MapPoint a) { return {s * a.e, s * a.n}; }
  friend bool operator==(const MapPoint&, const MapPoint&) = default;
};

inline double norm(MapPoint p) { return std::hypot(p.e, p.n); }
inline double distance(MapPoint a, MapPoint b) { return norm(a - b); }

/// Axis-aligned rectangle in the map frame.
struct Rect {
  double min_e = 0.0;
  double min_n = 0.0;
  double max_e = 0.0;
  double max_n = 0.0;

  [[nodiscard]] double width() const { return max_e - min_e; }
  [[nodiscard]] double height() const { return max_n - min_n; }
  [[nodiscard]] bool degenerate() const { return !(max_e > min_e) || !(max_n > min_n); }
  [[nodiscard]] bool contains(MapPoint p) const {
    return p.e >= min_e && p.e <= max_e && p.n >= min_n && p.n <= max_n;
  }
  [[nodiscard]] Rect expanded(double margin) const {
    return {min_e - margin, min_n - margin, max_e + margin, max_n + margin};
  }
  [[nodiscard]] Rect united(const Rect& o) const {
    return {std::min(min_e, o.min_e), std::min(min_n, o.min_n), std::max(max_e, o.max_e),
            std::max(max_n, o.max_n)};
  }
};

/// Equatorial radius used by the tangent-plane projection.
inline constexpr double kEarthRadiusM = 6378137.0;

/// Equirectangular projection about `origin`. Requires |p.lat - origin.lat| < 1 degree;
/// throws Error(kOutOfExtent) otherwise.
MapPoint geo_to_map(GeoPoint p, GeoPoint origin);

/// Exact algebraic inverse of geo_to_map.
GeoPoint map_to_geo(MapPoint p, GeoPoint origin);

}  // namespace osmmcl
