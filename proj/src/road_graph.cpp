#include "osmmcl/road_graph.hpp"

#include <expat.h>

#include <charconv>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "osmmcl/error.hpp"

namespace osmmcl {
namespace {

struct RawWay {
  OsmId id = 0;
  std::vector<OsmId> refs;
  std::string highway;
};

struct ParserState {
  XML_Parser parser = nullptr;
  std::map<OsmId, GeoPoint> nodes;
  std::vector<RawWay> ways;
  std::optional<RawWay> current_way;
  std::optional<ParseError> failure;
};

[[noreturn]] void fail_at(ParserState& state, const std::string& what) {
  throw ParseError(what, XML_GetCurrentLineNumber(state.parser),
                   XML_GetCurrentColumnNumber(state.parser) + 1);
}

const char* find_attr(const XML_Char** attrs, const char* name) {
  for (std::size_t i = 0; attrs[i] != nullptr; i += 2) {
    if (std::strcmp(attrs[i], name) == 0) return attrs[i + 1];
  }
  return nullptr;
}

const char* require_attr(ParserState& state, const XML_Char** attrs, const char* element,
                         const char* name) {
  const char* v = find_attr(attrs, name);
  if (v == nullptr) fail_at(state, std::string("<") + element + "> is missing attribute '" + name + "'");
  return v;
}

template <class T>
T parse_number(ParserState& state, const char* text, const char* what) {
  T value{};
  const char* end = text + std::strlen(text);
  auto [ptr, ec] = std::from_chars(text, end, value);
  if (ec != std::errc() || ptr != end) {
    fail_at(state, std::string("invalid ") + what + " '" + text + "'");
  }
  return value;
}

void on_start(ParserState& state, const XML_Char* name, const XML_Char** attrs) {
  if (std::strcmp(name, "node") == 0) {
    const auto id = parse_number<OsmId>(state, require_attr(state, attrs, "node", "id"), "node id");
    const auto lat = parse_number<double>(state, require_attr(state, attrs, "node", "lat"), "latitude");
    const auto lon = parse_number<double>(state, require_attr(state, attrs, "node", "lon"), "longitude");
    if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
      fail_at(state, "node " + std::to_string(id) + " has coordinates outside WGS-84 range");
    }
    state.nodes[id] = GeoPoint{lat, lon};
  } else if (std::strcmp(name, "way") == 0) {
    RawWay way;
    way.id = parse_number<OsmId>(state, require_attr(state, attrs, "way", "id"), "way id");
    state.current_way = std::move(way);
  } else if (std::strcmp(name, "nd") == 0 && state.current_way) {
    state.current_way->refs.push_back(
        parse_number<OsmId>(state, require_attr(state, attrs, "nd", "ref"), "node reference"));
  } else if (std::strcmp(name, "tag") == 0 && state.current_way) {
    const char* k = find_attr(attrs, "k");
    const char* v = find_attr(attrs, "v");
    if (k != nullptr && v != nullptr && std::strcmp(k, "highway") == 0) state.current_way->highway = v;
  }
}

void on_end(ParserState& state, const XML_Char* name) {
  if (std::strcmp(name, "way") == 0 && state.current_way) {
    state.ways.push_back(std::move(*state.current_way));
    state.current_way.reset();
  }
}

// Expat callbacks are C functions; exceptions must not cross them.
void XMLCALL start_handler(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto& state = *static_cast<ParserState*>(user);
  if (state.failure) return;
  try {
    on_start(state, name, attrs);
  } catch (const ParseError& e) {
    state.failure = e;
    XML_StopParser(state.parser, XML_FALSE);
  }
}

void XMLCALL end_handler(void* user, const XML_Char* name) {
  auto& state = *static_cast<ParserState*>(user);
  if (state.failure) return;
  on_end(state, name);
}

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

const HighwayFilter& default_highway_filter() {
  static const HighwayFilter filter{"motorway",     "trunk",       "primary", "secondary", "tertiary",
                                    "unclassified", "residential", "service", "track"};
  return filter;
}

RoadGraph::RoadGraph(GeoPoint origin, std::map<OsmId, MapPoint> nodes, std::vector<Way> ways)
    : origin_(origin), nodes_(std::move(nodes)) {
  for (auto& way : ways) {
    std::vector<OsmId> kept;
    kept.reserve(way.node_ids.size());
    for (OsmId id : way.node_ids) {
      auto it = nodes_.find(id);
      if (it == nodes_.end()) {
        throw Error(ErrorCode::kStructure,
                    "way " + std::to_string(way.id) + " references missing node " + std::to_string(id));
      }
      if (!kept.empty() && (kept.back() == id || nodes_.at(kept.back()) == it->second)) continue;
      kept.push_back(id);
    }
    if (kept.size() < 2) continue;
    way.node_ids = std::move(kept);
    ways_.push_back(std::move(way));
  }
  for (const auto& way : ways_) {
    way_segment_offsets_.push_back(segments_.size());
    for (std::size_t i = 1; i < way.node_ids.size(); ++i) {
      segments_.push_back({nodes_.at(way.node_ids[i - 1]), nodes_.at(way.node_ids[i])});
    }
  }
}

const Way* RoadGraph::find_way(OsmId id) const {
  for (const auto& w : ways_) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

MapPoint RoadGraph::node(OsmId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::kInvalidArgument, "unknown node " + std::to_string(id));
  return it->second;
}

Rect RoadGraph::bounds() const {
  if (nodes_.empty()) return {};
  Rect r{nodes_.begin()->second.e, nodes_.begin()->second.n, nodes_.begin()->second.e,
         nodes_.begin()->second.n};
  for (const auto& [id, p] : nodes_) {
    r.min_e = std::min(r.min_e, p.e);
    r.min_n = std::min(r.min_n, p.n);
    r.max_e = std::max(r.max_e, p.e);
    r.max_n = std::max(r.max_n, p.n);
  }
  return r;
}

double RoadGraph::total_length() const {
  double sum = 0.0;
  for (const auto& s : segments_) sum += s.length();
  return sum;
}

RoadGraph parse_osm(std::string_view xml, const HighwayFilter& highway_filter) {
  ParserState state;
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate(nullptr));
  if (!parser) throw Error(ErrorCode::kResource, "cannot allocate XML parser");
  state.parser = parser.get();
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), start_handler, end_handler);

  const auto status = XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), XML_TRUE);
  if (state.failure) throw *state.failure;
  if (status != XML_STATUS_OK) {
    throw ParseError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                     XML_GetCurrentLineNumber(parser.get()), XML_GetCurrentColumnNumber(parser.get()) + 1);
  }

  std::vector<const RawWay*> retained;
  for (const auto& way : state.ways) {
    if (highway_filter.contains(way.highway)) retained.push_back(&way);
  }
  if (retained.empty()) throw Error(ErrorCode::kEmptyMap, "no ways match the highway filter");

  std::map<OsmId, GeoPoint> used;
  for (const RawWay* way : retained) {
    for (OsmId ref : way->refs) {
      auto it = state.nodes.find(ref);
      if (it == state.nodes.end()) {
        throw Error(ErrorCode::kStructure,
                    "way " + std::to_string(way->id) + " references missing node " + std::to_string(ref));
      }
      used.emplace(ref, it->second);
    }
  }

  GeoPoint origin{};
  for (const auto& [id, g] : used) {
    origin.lat += g.lat;
    origin.lon += g.lon;
  }
  origin.lat /= static_cast<double>(used.size());
  origin.lon /= static_cast<double>(used.size());

  std::map<OsmId, MapPoint> nodes;
  for (const auto& [id, g] : used) nodes.emplace(id, geo_to_map(g, origin));

  std::vector<Way> ways;
  ways.reserve(retained.size());
  for (const RawWay* raw : retained) ways.push_back(Way{raw->id, raw->refs, raw->highway});

  RoadGraph graph(origin, std::move(nodes), std::move(ways));
  if (graph.ways().empty()) throw Error(ErrorCode::kEmptyMap, "no retained way has two distinct nodes");
  return graph;
}

RoadGraph load_osm_file(const std::filesystem::path& path, const HighwayFilter& highway_filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_osm(buf.str(), highway_filter);
}

std::map<OsmId, std::vector<OsmId>> node_adjacency(const RoadGraph& graph) {
  std::map<OsmId, std::vector<OsmId>> adj;
  for (const auto& way : graph.ways()) {
    for (std::size_t i = 1; i < way.node_ids.size(); ++i) {
      adj[way.node_ids[i - 1]].push_back(way.node_ids[i]);
      adj[way.node_ids[i]].push_back(way.node_ids[i - 1]);
    }
  }
  for (auto& [id, list] : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

}  // namespace osmmcl
