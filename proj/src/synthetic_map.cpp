#include "osmmcl/synthetic_map.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "osmmcl/error.hpp"
#include "osmmcl/rng.hpp"

namespace osmmcl {

std::string synthesize_osm(const SyntheticMapConfig& cfg) {
  if (!(cfg.width > 0.0 && cfg.height > 0.0) || cfg.junctions < 2 || !(cfg.node_spacing > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic map needs a positive extent and at least two junctions");
  }
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<MapPoint> junctions;
  for (std::size_t attempt = 0; junctions.size() < cfg.junctions && attempt < 100'000; ++attempt) {
    const MapPoint p{(unit(rng) - 0.5) * cfg.width, (unit(rng) - 0.5) * cfg.height};
    bool clear = true;
    for (const auto& q : junctions) clear = clear && distance(p, q) >= cfg.min_junction_spacing;
    if (clear) junctions.push_back(p);
  }

  // Gabriel graph: keep (i, j) unless some k lies inside the circle with diameter ij.
  std::vector<std::array<std::size_t, 2>> edges;
  for (std::size_t i = 0; i < junctions.size(); ++i) {
    for (std::size_t j = i + 1; j < junctions.size(); ++j) {
      const double dij = distance(junctions[i], junctions[j]);
      bool keep = true;
      for (std::size_t k = 0; k < junctions.size() && keep; ++k) {
        if (k == i || k == j) continue;
        const double dik = distance(junctions[i], junctions[k]);
        const double djk = distance(junctions[j], junctions[k]);
        keep = dik * dik + djk * djk >= dij * dij;
      }
      if (keep) edges.push_back({i, j});
    }
  }

  static constexpr const char* kClasses[] = {"tertiary", "unclassified", "track", "residential", "secondary"};
  std::uniform_int_distribution<std::size_t> pick_class(0, std::size(kClasses) - 1);

  std::vector<MapPoint> nodes = junctions;
  struct WayOut {
    std::vector<std::size_t> refs;
    const char* highway;
  };
  std::vector<WayOut> ways;
  for (const auto& [i, j] : edges) {
    const MapPoint a = junctions[i];
    const MapPoint b = junctions[j];
    const double len = distance(a, b);
    const MapPoint normal{-(b.n - a.n) / len, (b.e - a.e) / len};
    const double bulge = cfg.curvature * len * (2.0 * unit(rng) - 1.0);
    const double wave = 0.3 * bulge * (2.0 * unit(rng) - 1.0);
    const auto pieces = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(len / cfg.node_spacing)));
    WayOut way{{i}, kClasses[pick_class(rng)]};
    for (std::size_t s = 1; s < pieces; ++s) {
      const double t = static_cast<double>(s) / static_cast<double>(pieces);
      const double offset = bulge * std::sin(std::numbers::pi * t) + wave * std::sin(2.0 * std::numbers::pi * t);
      nodes.push_back(a + t * (b - a) + offset * normal);
      way.refs.push_back(nodes.size() - 1);
    }
    way.refs.push_back(j);
    ways.push_back(std::move(way));
  }

  std::ostringstream xml;
  xml << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  xml << "<osm version=\"0.6\" generator=\"osmmcl synthetic map seed=" << cfg.seed << "\">\n";
  char buf[160];
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const GeoPoint g = map_to_geo(nodes[k], cfg.center);
    std::snprintf(buf, sizeof(buf), "  <node id=\"%zu\" lat=\"%.9f\" lon=\"%.9f\"/>\n", k + 1, g.lat, g.lon);
    xml << buf;
  }
  for (std::size_t w = 0; w < ways.size(); ++w) {
    xml << "  <way id=\"" << 1000 + w << "\">\n";
    for (auto ref : ways[w].refs) xml << "    <nd ref=\"" << ref + 1 << "\"/>\n";
    xml << "    <tag k=\"highway\" v=\"" << ways[w].highway << "\"/>\n";
    xml << "  </way>\n";
  }
  xml << "</osm>\n";
  return xml.str();
}

}  // namespace osmmcl
