#pragma once

#include <cstdint>
#include <string>

#include "osmmcl/geo.hpp"

namespace osmmcl {

/// Irregular rural-style road network: seeded junctions joined by their Gabriel graph
/// (connected and planar), each edge drawn as a gently curving way.
struct SyntheticMapConfig {
  double width = 1500.0;   // m
  double height = 1340.0;  // m
  std::size_t junctions = 26;
  double min_junction_spacing = 170.0;  // m
  double node_spacing = 15.0;           // m between way nodes
  double curvature = 0.12;              // max lateral bulge as a fraction of edge length
  GeoPoint center{44.2, -72.6};
  std::uint64_t seed = 7;
};

/// OSM XML v0.6 text for the generated network.
std::string synthesize_osm(const SyntheticMapConfig& cfg);

}  // namespace osmmcl
