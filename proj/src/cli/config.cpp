#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <string>

#include "osmmcl/cli.hpp"

namespace osmmcl::cli {
namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, field + ": " + message);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Reads fields from one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) invalid(prefix_.empty() ? "config" : prefix_, "must be an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

  [[nodiscard]] std::string field(const std::string& key) const { return join(prefix_, key); }

  const Json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number()) invalid(field(key), "must be a number");
      out = v->get<double>();
      if (!std::isfinite(out)) invalid(field(key), "must be finite");
    }
  }

  template <typename T>
  void count(const std::string& key, T& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) invalid(field(key), "must be a non-negative integer");
      out = static_cast<T>(v->get<unsigned long long>());
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const Json* v = get(key)) {
      if (!v->is_string()) invalid(field(key), "must be a string");
      out = v->get<std::string>();
    }
  }

  void strings(const std::string& key, std::vector<std::string>& out) {
    if (const Json* v = get(key)) {
      if (!v->is_array()) invalid(field(key), "must be an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) invalid(field(key), "must be an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }

  std::vector<double> numbers(const std::string& key, std::size_t n) {
    const Json* v = get(key);
    if (v == nullptr) return {};
    if (!v->is_array() || v->size() != n) invalid(field(key), "must be an array of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) invalid(field(key), "must be an array of " + std::to_string(n) + " numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) invalid(field(key), "unknown field");
    }
  }

 private:
  const Json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

// Library validators name fields relative to their own object; prefix them here.
template <typename F>
void validate_as(const std::string& prefix, F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    std::string what = e.what();
    const auto dot = what.find('.');
    const auto space = what.find(' ');
    if (dot == std::string::npos || space == std::string::npos || dot > space) {
      throw Error(ErrorCode::kInvalidArgument, prefix + ": " + what);
    }
    throw Error(ErrorCode::kInvalidArgument,
                prefix + "." + what.substr(dot + 1, space - dot - 1) + ":" + what.substr(space));
  }
}

std::string estimator_name(Estimator e) { return e == Estimator::kMaxWeight ? "max_weight" : "weighted_mean"; }

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kStructure:
    case ErrorCode::kEmptyMap:
    case ErrorCode::kOutOfExtent:
    case ErrorCode::kResource:
    case ErrorCode::kInvalidArgument:
      return kExitInvalid;
    case ErrorCode::kDegenerate:
    case ErrorCode::kIo:
      return kExitRuntime;
  }
  return kExitRuntime;
}

HighwayFilter highway_filter(const std::vector<std::string>& highways) {
  if (highways.empty()) return default_highway_filter();
  return HighwayFilter(highways.begin(), highways.end());
}

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

ScenarioConfig parse_scenario_config(const Json& j, const std::string& prefix, bool allow_seed) {
  ScenarioConfig cfg;
  ObjectReader r(j, prefix);
  if (const Json* route = r.get("route")) {
    if (!route->is_array()) invalid(r.field("route"), "must be an array of way ids");
    for (const auto& id : *route) {
      if (!id.is_number_integer()) invalid(r.field("route"), "must be an array of way ids");
      cfg.route.push_back(id.get<OsmId>());
    }
  }
  r.number("route_length_m", cfg.route_length_m);
  r.count("num_steps", cfg.num_steps);
  r.number("speed", cfg.speed);
  r.number("step_dt", cfg.step_dt);
  r.number("odom_rate_hz", cfg.odom_rate_hz);
  r.number("wheelbase", cfg.wheelbase);
  r.count("points_per_scan", cfg.points_per_scan);
  r.number("road_point_lateral_sigma", cfg.road_point_lateral_sigma);
  r.number("nonroad_fraction", cfg.nonroad_fraction);
  r.number("label_flip_prob", cfg.label_flip_prob);
  r.number("sensor_range", cfg.sensor_range);
  r.number("sensor_fov_deg", cfg.sensor_fov_deg);
  r.number("nonroad_min_offset", cfg.nonroad_min_offset);
  r.number("odom_bias", cfg.odom_bias);
  r.number("odom_speed_sigma", cfg.odom_speed_sigma);
  r.number("odom_steer_sigma", cfg.odom_steer_sigma);
  if (allow_seed) r.count("seed", cfg.seed);
  r.finish();
  validate_as(prefix, [&] { cfg.validate(); });
  return cfg;
}

Json to_json(const ScenarioConfig& cfg, bool include_seed) {
  Json j;
  j["route"] = cfg.route;
  j["route_length_m"] = cfg.route_length_m;
  j["num_steps"] = cfg.num_steps;
  j["speed"] = cfg.speed;
  j["step_dt"] = cfg.step_dt;
  j["odom_rate_hz"] = cfg.odom_rate_hz;
  j["wheelbase"] = cfg.wheelbase;
  j["points_per_scan"] = cfg.points_per_scan;
  j["road_point_lateral_sigma"] = cfg.road_point_lateral_sigma;
  j["nonroad_fraction"] = cfg.nonroad_fraction;
  j["label_flip_prob"] = cfg.label_flip_prob;
  j["sensor_range"] = cfg.sensor_range;
  j["sensor_fov_deg"] = cfg.sensor_fov_deg;
  j["nonroad_min_offset"] = cfg.nonroad_min_offset;
  j["odom_bias"] = cfg.odom_bias;
  j["odom_speed_sigma"] = cfg.odom_speed_sigma;
  j["odom_steer_sigma"] = cfg.odom_steer_sigma;
  if (include_seed) j["seed"] = cfg.seed;
  return j;
}

FieldOfView parse_fov(const Json& j, const std::string& prefix) {
  FieldOfView fov;
  ObjectReader r(j, prefix);
  r.number("azimuth_span_deg", fov.azimuth_span_deg);
  r.number("azimuth_resolution_deg", fov.azimuth_resolution_deg);
  r.number("min_altitude_deg", fov.min_altitude_deg);
  r.number("max_altitude_deg", fov.max_altitude_deg);
  r.finish();
  validate_as(prefix, [&] { fov.validate(); });
  return fov;
}

Json to_json(const FieldOfView& fov) {
  Json j;
  j["azimuth_span_deg"] = fov.azimuth_span_deg;
  j["azimuth_resolution_deg"] = fov.azimuth_resolution_deg;
  j["min_altitude_deg"] = fov.min_altitude_deg;
  j["max_altitude_deg"] = fov.max_altitude_deg;
  return j;
}

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  ObjectReader r(j, "");

  if (!r.has("map")) invalid("map", "required");
  r.string("map", cfg.map);
  if (cfg.map.empty()) invalid("map", "must not be empty");
  r.strings("highways", cfg.highways);
  r.count("seed", cfg.seed);
  r.string("output_dir", cfg.output_dir);

  if (const Json* f = r.get("field")) {
    ObjectReader fr(*f, "field");
    fr.string("path", cfg.field.path);
    fr.number("cell_size", cfg.field.cell_size);
    fr.number("margin", cfg.field.margin);
    fr.count("cell_budget", cfg.field.cell_budget);
    fr.finish();
    if (!(cfg.field.cell_size > 0.0)) invalid("field.cell_size", "must be > 0");
    if (!(cfg.field.margin >= 0.0)) invalid("field.margin", "must be >= 0");
  }

  if (!r.has("scenario")) invalid("scenario", "required");
  {
    const Json& s = *r.get("scenario");
    if (!s.is_object()) invalid("scenario", "must be an object");
    if (s.contains("replay")) {
      ObjectReader sr(s, "scenario");
      sr.string("replay", cfg.scenario.replay);
      sr.number("wheelbase", cfg.scenario.generate.wheelbase);
      sr.finish();
      if (cfg.scenario.replay.empty()) invalid("scenario.replay", "must not be empty");
      if (!(cfg.scenario.generate.wheelbase > 0.0)) invalid("scenario.wheelbase", "must be > 0");
    } else {
      cfg.scenario.generate = parse_scenario_config(s, "scenario", false);
    }
    cfg.scenario.generate.seed = cfg.seed;
  }

  if (!r.has("init")) invalid("init", "required");
  {
    ObjectReader ir(*r.get("init"), "init");
    std::string mode = "tracking";
    ir.string("mode", mode);
    if (mode == "tracking") {
      cfg.init.mode = InitMode::kTracking;
      cfg.init.count = 10'000;
    } else if (mode == "global") {
      cfg.init.mode = InitMode::kGlobal;
      cfg.init.count = 100'000;
    } else {
      invalid("init.mode", "must be \"tracking\" or \"global\"");
    }
    ir.count("count", cfg.init.count);
    if (cfg.init.count == 0) invalid("init.count", "must be > 0");
    if (cfg.init.mode == InitMode::kTracking) {
      ir.number("radius", cfg.init.radius);
      if (!(cfg.init.radius >= 0.0)) invalid("init.radius", "must be >= 0");
      if (const auto c = ir.numbers("center", 3); !c.empty()) cfg.init.center = Pose{c[0], c[1], c[2]};
    } else {
      if (const auto a = ir.numbers("area", 4); !a.empty()) {
        const Rect area{a[0], a[1], a[2], a[3]};
        if (!(area.max_e >= area.min_e && area.max_n >= area.min_n)) {
          invalid("init.area", "must be [min_e, min_n, max_e, max_n] with min <= max");
        }
        cfg.init.area = area;
      }
    }
    ir.finish();
  }

  if (const Json* d = r.get("distance_function")) {
    ObjectReader dr(*d, "distance_function");
    if (const Json* kind = dr.get("kind")) {
      if (!kind->is_string()) invalid("distance_function.kind", "must be a string");
      try {
        cfg.distance_function.kind = parse_distance_function_kind(kind->get<std::string>());
      } catch (const Error&) {
        invalid("distance_function.kind", "must be one of gaussian, quadratic, exp_decay, maplite_linear");
      }
    }
    dr.number("sigma", cfg.distance_function.sigma);
    dr.number("tau", cfg.distance_function.tau);
    dr.number("d_max", cfg.distance_function.d_max);
    dr.number("epsilon", cfg.distance_function.epsilon);
    dr.finish();
    validate_as("distance_function", [&] { cfg.distance_function.validate(); });
  }

  if (const Json* m = r.get("motion_noise")) {
    ObjectReader mr(*m, "motion_noise");
    mr.number("sigma_pos", cfg.motion_noise.sigma_pos);
    mr.number("sigma_theta", cfg.motion_noise.sigma_theta);
    mr.finish();
    if (!(cfg.motion_noise.sigma_pos >= 0.0)) invalid("motion_noise.sigma_pos", "must be >= 0");
    if (!(cfg.motion_noise.sigma_theta >= 0.0)) invalid("motion_noise.sigma_theta", "must be >= 0");
  }

  r.count("resample_interval", cfg.resample_interval);
  if (cfg.resample_interval == 0) invalid("resample_interval", "must be > 0");
  r.number("voxel_size", cfg.voxel_size);
  if (!(cfg.voxel_size >= 0.0)) invalid("voxel_size", "must be >= 0");

  std::string estimator = estimator_name(cfg.estimator);
  r.string("estimator", estimator);
  if (estimator == "weighted_mean") {
    cfg.estimator = Estimator::kWeightedMean;
  } else if (estimator == "max_weight") {
    cfg.estimator = Estimator::kMaxWeight;
  } else {
    invalid("estimator", "must be \"weighted_mean\" or \"max_weight\"");
  }

  if (const Json* c = r.get("convergence")) {
    ObjectReader cr(*c, "convergence");
    cr.number("spread_threshold_m", cfg.convergence.spread_threshold_m);
    cr.count("sustain_steps", cfg.convergence.sustain_steps);
    cr.finish();
    if (!(cfg.convergence.spread_threshold_m > 0.0)) invalid("convergence.spread_threshold_m", "must be > 0");
    if (cfg.convergence.sustain_steps == 0) invalid("convergence.sustain_steps", "must be > 0");
  }

  r.finish();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "config: cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, "config: " + path.string() + " is not valid JSON (" + e.what() + ")");
  }
  return parse_run_config(j, path.parent_path());
}

Json to_json(const RunConfig& cfg) {
  Json j;
  j["map"] = cfg.map;
  j["highways"] = cfg.highways;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["field"] = {{"path", cfg.field.path},
                {"cell_size", cfg.field.cell_size},
                {"margin", cfg.field.margin},
                {"cell_budget", cfg.field.cell_budget}};
  if (!cfg.scenario.replay.empty()) {
    j["scenario"] = {{"replay", cfg.scenario.replay}, {"wheelbase", cfg.scenario.generate.wheelbase}};
  } else {
    j["scenario"] = to_json(cfg.scenario.generate, false);
  }
  Json init;
  if (cfg.init.mode == InitMode::kTracking) {
    init["mode"] = "tracking";
    init["count"] = cfg.init.count;
    init["radius"] = cfg.init.radius;
    if (cfg.init.center) init["center"] = {cfg.init.center->e, cfg.init.center->n, cfg.init.center->theta};
  } else {
    init["mode"] = "global";
    init["count"] = cfg.init.count;
    if (cfg.init.area) {
      init["area"] = {cfg.init.area->min_e, cfg.init.area->min_n, cfg.init.area->max_e, cfg.init.area->max_n};
    }
  }
  j["init"] = init;
  const auto& d = cfg.distance_function;
  j["distance_function"] = {{"kind", std::string(to_string(d.kind))},
                            {"sigma", d.sigma},
                            {"tau", d.tau},
                            {"d_max", d.d_max},
                            {"epsilon", d.epsilon}};
  j["motion_noise"] = {{"sigma_pos", cfg.motion_noise.sigma_pos}, {"sigma_theta", cfg.motion_noise.sigma_theta}};
  j["resample_interval"] = cfg.resample_interval;
  j["voxel_size"] = cfg.voxel_size;
  j["estimator"] = estimator_name(cfg.estimator);
  j["convergence"] = {{"spread_threshold_m", cfg.convergence.spread_threshold_m},
                      {"sustain_steps", cfg.convergence.sustain_steps}};
  return j;
}

}  // namespace osmmcl::cli
