#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "osmmcl/geo.hpp"

namespace osmmcl {

using OsmId = std::int64_t;

struct Segment {
  MapPoint a;
  MapPoint b;

  [[nodiscard]] double length() const { return distance(a, b); }
};

struct Way {
  OsmId id = 0;
  std::vector<OsmId> node_ids;
  std::string highway;
};

using HighwayFilter = std::set<std::string, std::less<>>;

/// motorway, trunk, primary, secondary, tertiary, unclassified, residential, service, track.
const HighwayFilter& default_highway_filter();

/// Road network in a local metric frame. Immutable once built.
///
/// Every way references existing nodes and has at least two nodes; `segments()` is the
/// concatenation of consecutive node pairs over all ways, in way order. Consecutive
/// duplicate references and coincident consecutive nodes are collapsed at construction,
/// so no segment has zero length.
class RoadGraph {
 public:
  RoadGraph(GeoPoint origin, std::map<OsmId, MapPoint> nodes, std::vector<Way> ways);

  [[nodiscard]] GeoPoint origin() const { return origin_; }
  [[nodiscard]] const std::map<OsmId, MapPoint>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<Way>& ways() const { return ways_; }
  [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }
  /// Index into segments() of the first segment contributed by ways()[i].
  [[nodiscard]] std::size_t first_segment_of_way(std::size_t way_index) const {
    return way_segment_offsets_[way_index];
  }
  [[nodiscard]] const Way* find_way(OsmId id) const;
  [[nodiscard]] MapPoint node(OsmId id) const;
  /// Bounding rectangle of all nodes.
  [[nodiscard]] Rect bounds() const;
  [[nodiscard]] double total_length() const;

 private:
  GeoPoint origin_;
  std::map<OsmId, MapPoint> nodes_;
  std::vector<Way> ways_;
  std::vector<Segment> segments_;
  std::vector<std::size_t> way_segment_offsets_;
};

/// Parses OSM XML v0.6 (node/way/nd/tag; everything else ignored), keeping the ways whose
/// highway tag is in `highway_filter`. The origin is the lat/lon centroid of retained
/// nodes.
///
/// Throws ParseError on malformed XML or attributes, Error(kStructure) naming the way when
/// a retained way references a missing node, Error(kEmptyMap) when nothing is retained.
RoadGraph parse_osm(std::string_view xml, const HighwayFilter& highway_filter = default_highway_filter());

RoadGraph load_osm_file(const std::filesystem::path& path,
                        const HighwayFilter& highway_filter = default_highway_filter());

/// Node-level adjacency (undirected, sorted, de-duplicated) over retained ways.
std::map<OsmId, std::vector<OsmId>> node_adjacency(const RoadGraph& graph);

}  // namespace osmmcl
