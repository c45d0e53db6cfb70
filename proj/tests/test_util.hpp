#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "osmmcl/road_graph.hpp"

namespace osmmcl::testing {

inline std::filesystem::path source_dir() { return OSMMCL_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return source_dir() / "fixtures" / name; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Distance to a segment from the triangle-area height, falling back to the endpoints when
// the foot of the perpendicular is off the segment. Deliberately not the clamped-projection
// form used by the library.
inline double oracle_segment_distance(MapPoint p, const Segment& s) {
  const double ab = distance(s.a, s.b);
  const double pa = distance(p, s.a);
  const double pb = distance(p, s.b);
  if (ab == 0.0) return pa;
  // Obtuse angle at an endpoint puts the perpendicular foot outside the segment.
  if (pb * pb > pa * pa + ab * ab) return pa;
  if (pa * pa > pb * pb + ab * ab) return pb;
  const double cross = (s.b.e - s.a.e) * (p.n - s.a.n) - (s.b.n - s.a.n) * (p.e - s.a.e);
  return std::min({std::abs(cross) / ab, pa, pb});
}

inline double oracle_nearest(MapPoint p, const RoadGraph& g) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : g.segments()) best = std::min(best, oracle_segment_distance(p, s));
  return best;
}

// Scratch directory unique to the running test.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("osmmcl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace osmmcl::testing
