#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "osmmcl/cli.hpp"
#include "osmmcl/csv.hpp"
#include "osmmcl/distance_field.hpp"

namespace osmmcl::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Writes through a temporary sibling so a failed command leaves no partial file.
template <typename F>
void write_atomically(const std::filesystem::path& path, bool binary, F&& fill) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    fill(out);
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error(ErrorCode::kIo, "failed writing " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_atomically(path, false, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

void require_exists(const std::filesystem::path& path, const std::string& field) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kInvalidArgument, field + ": " + path.string() + " does not exist");
  }
}

Json optional_json(const auto& v) { return v ? Json(*v) : Json(nullptr); }

Json rect_json(const Rect& r) { return Json::array({r.min_e, r.min_n, r.max_e, r.max_n}); }

struct RunInputs {
  RoadGraph graph;
  DistanceField field;
  Scenario scenario;
};

RunInputs prepare_run(const RunConfig& cfg, int workers, std::ostream& log) {
  const auto map_path = cfg.resolve(cfg.map);
  require_exists(map_path, "map");
  if (!cfg.field.path.empty()) require_exists(cfg.resolve(cfg.field.path), "field.path");
  if (!cfg.scenario.replay.empty()) require_exists(cfg.resolve(cfg.scenario.replay), "scenario.replay");

  RoadGraph graph = load_osm_file(map_path, highway_filter(cfg.highways));

  auto t0 = Clock::now();
  Scenario scenario;
  if (!cfg.scenario.replay.empty()) {
    const Replay replay = load_replay(cfg.resolve(cfg.scenario.replay));
    scenario = assemble_scenario(replay.ground_truth, replay.scans, cfg.scenario.generate.wheelbase);
  } else {
    scenario = simulate_scenario(graph, cfg.scenario.generate, workers);
  }
  log << "scenario: " << scenario.steps.size() << " steps (" << seconds_since(t0) << " s)\n";

  t0 = Clock::now();
  DistanceField field = [&] {
    if (!cfg.field.path.empty()) return read_mcdf_file(cfg.resolve(cfg.field.path));
    DistanceFieldOptions opt;
    opt.cell_size = cfg.field.cell_size;
    opt.cell_budget = cfg.field.cell_budget;
    opt.workers = workers;
    return build_distance_field(graph, graph.bounds().expanded(cfg.field.margin), opt);
  }();
  log << "field: " << field.width() << " x " << field.height() << " cells (" << seconds_since(t0) << " s)\n";
  return {std::move(graph), std::move(field), std::move(scenario)};
}

InitSpec init_spec(const RunConfig& cfg, const RunInputs& in) {
  if (in.scenario.steps.empty()) throw Error(ErrorCode::kInvalidArgument, "scenario: no steps");
  InitSpec spec;
  if (cfg.init.mode == InitMode::kTracking) {
    spec = InitSpec::tracking(cfg.init.center.value_or(in.scenario.steps.front().ground_truth), cfg.init.radius,
                              cfg.init.count);
  } else {
    spec = InitSpec::global(cfg.init.area.value_or(in.graph.bounds()), cfg.init.count);
  }
  spec.validate();
  return spec;
}

FilterOptions filter_options(const RunConfig& cfg, int workers) {
  FilterOptions opt;
  opt.noise = cfg.motion_noise;
  opt.resample_interval = cfg.resample_interval;
  opt.estimator = cfg.estimator;
  opt.voxel_size = cfg.voxel_size;
  opt.workers = workers;
  return opt;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
  write_atomically(path, false, [&](std::ostream& out) {
    out << "step,est_e,est_n,est_theta,gt_e,gt_n,gt_theta,error_m,spread_m,resampled\n";
    for (const auto& r : trace.records) {
      out << r.step << ',' << format_double(r.estimate.e) << ',' << format_double(r.estimate.n) << ','
          << format_double(r.estimate.theta) << ',' << format_double(r.ground_truth.e) << ','
          << format_double(r.ground_truth.n) << ',' << format_double(r.ground_truth.theta) << ','
          << format_double(r.error_m) << ',' << format_double(r.spread_m) << ',' << (r.resampled ? 1 : 0) << '\n';
    }
  });
}

Json summary_json(const RunSummary& summary, std::size_t steps, const RunConfig& cfg) {
  Json j;
  j["convergence_step"] = optional_json(summary.convergence_step);
  j["mean_error_post_convergence"] = optional_json(summary.mean_error_post_convergence);
  j["error_convergence_step"] = optional_json(summary.error_convergence_step);
  j["mean_error_post_error_convergence"] = optional_json(summary.mean_error_post_error_convergence);
  j["mean_error_all"] = summary.mean_error_all;
  j["final_error"] = summary.final_error;
  j["degenerate_steps"] = summary.degenerate_steps;
  j["steps"] = steps;
  j["seed"] = cfg.seed;
  j["config"] = to_json(cfg);
  return j;
}

std::string format_sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %16s %20s %16s\n", "Function", "Mean error (m)", "Convergence (steps)",
                "Final error (m)");
  out << line;
  for (const auto& row : rows) {
    const auto& s = row.summary;
    const std::string mean = s.mean_error_post_convergence ? fmt("%.2f", *s.mean_error_post_convergence) : "n/a";
    const std::string conv = s.convergence_step ? std::to_string(*s.convergence_step) : "n/a";
    std::snprintf(line, sizeof(line), "%-12s %16s %20s %16s\n", std::string(display_name(row.kind)).c_str(),
                  mean.c_str(), conv.c_str(), fmt("%.2f", s.final_error).c_str());
    out << line;
  }
  return out.str();
}

void cmd_build_field(const BuildFieldArgs& args, std::ostream& log) {
  require_exists(args.map, "--map");
  if (!(args.cell_size > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--cell-size: must be > 0");
  if (!(args.margin >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "--margin: must be >= 0");
  const RoadGraph graph = load_osm_file(args.map, highway_filter(args.highways));
  const Rect bounds = args.bounds.value_or(graph.bounds().expanded(args.margin));

  DistanceFieldOptions opt;
  opt.cell_size = args.cell_size;
  opt.cell_budget = args.cell_budget;
  opt.workers = args.workers;
  const auto t0 = Clock::now();
  const DistanceField field = build_distance_field(graph, bounds, opt);
  const double elapsed = seconds_since(t0);

  write_atomically(args.out, true, [&](std::ostream& out) { write_mcdf(out, field); });
  Json side;
  side["map"] = args.map.string();
  side["highways"] = args.highways;
  side["origin_geo"] = {graph.origin().lat, graph.origin().lon};
  side["bounds"] = rect_json(bounds);
  side["cell_size"] = args.cell_size;
  side["cell_budget"] = args.cell_budget;
  side["width"] = field.width();
  side["height"] = field.height();
  side["field_origin"] = {field.origin().e, field.origin().n};
  std::filesystem::path side_path = args.out;
  side_path += ".json";
  write_json(side_path, side);

  log << "grid " << field.width() << " x " << field.height() << " cells at " << args.cell_size << " m, built in "
      << elapsed << " s\n";
}

void cmd_run(const RunArgs& args, std::ostream& log) {
  RunConfig cfg = load_run_config(args.config);
  const std::filesystem::path out_dir = args.out ? *args.out : cfg.resolve(cfg.output_dir);
  const RunInputs in = prepare_run(cfg, args.workers, log);
  const InitSpec init = init_spec(cfg, in);
  const FilterOptions opt = filter_options(cfg, args.workers);

  auto run_one = [&](const RunConfig& c, const std::filesystem::path& dir) {
    const PoseScorer scorer(in.field, c.distance_function);
    const auto t0 = Clock::now();
    const Trace trace = run_scenario(in.scenario, scorer, init, c.seed, opt, c.convergence);
    log << to_string(c.distance_function.kind) << ": " << trace.records.size() << " steps in " << seconds_since(t0)
        << " s\n";
    std::filesystem::create_directories(dir);
    write_trace_csv(dir / "trace.csv", trace);
    write_json(dir / "summary.json", summary_json(trace.summary, trace.records.size(), c));
    return trace.summary;
  };

  if (!args.sweep) {
    run_one(cfg, out_dir);
    return;
  }
  std::vector<SweepRow> rows;
  for (auto kind : kAllDistanceFunctionKinds) {
    RunConfig c = cfg;
    c.distance_function.kind = kind;
    rows.push_back({kind, run_one(c, out_dir / std::string(to_string(kind)))});
  }
  const std::string table = format_sweep_table(rows);
  write_atomically(out_dir / "table.txt", false, [&](std::ostream& out) {
    out << "# mode " << (cfg.init.mode == InitMode::kTracking ? "tracking" : "global") << ", seed " << cfg.seed
        << ", config " << to_json(cfg).dump() << '\n'
        << table;
  });
  log << table;
}

void cmd_project(const ProjectArgs& args, std::ostream& log) {
  require_exists(args.cloud, "--cloud");
  args.fov.validate();
  const auto cloud =
      args.cloud.extension() == ".csv" ? read_cloud_csv(args.cloud) : read_cloud_binary(args.cloud);
  const RangeImage image = project(cloud, args.fov);

  Json cfg;
  cfg["cloud"] = args.cloud.string();
  cfg["fov"] = to_json(args.fov);
  if (args.out_prefix.has_parent_path()) std::filesystem::create_directories(args.out_prefix.parent_path());
  write_pgm_triplet(args.out_prefix, image, {"config: " + cfg.dump()});

  const std::size_t occupied = image.occupancy();
  const std::size_t pixels = static_cast<std::size_t>(kImageRows) * kImageCols;
  Json report = cfg;
  report["points"] = cloud.size();
  report["rows"] = kImageRows;
  report["cols"] = kImageCols;
  report["occupied"] = occupied;
  report["occupancy"] = static_cast<double>(occupied) / static_cast<double>(pixels);
  std::filesystem::path report_path = args.out_prefix;
  report_path += "_occupancy.json";
  write_json(report_path, report);
  log << cloud.size() << " points, " << occupied << " of " << pixels << " pixels occupied\n";
}

void cmd_gen_scenario(const GenScenarioArgs& args, std::ostream& log) {
  require_exists(args.map, "--map");
  ScenarioConfig cfg;
  if (args.config) {
    require_exists(*args.config, "--config");
    std::ifstream in(*args.config);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kInvalidArgument, "--config: not valid JSON (" + std::string(e.what()) + ")");
    }
    cfg = parse_scenario_config(j, "scenario", true);
  }
  if (args.seed) cfg.seed = *args.seed;
  cfg.validate();

  const RoadGraph graph = load_osm_file(args.map, highway_filter(args.highways));
  const auto t0 = Clock::now();
  const GroundTruthTrace gt = generate_trajectory(graph, cfg);
  const auto scans = synthesize_scans(graph, cfg, gt, args.workers);
  save_replay(args.out, gt, scans);

  Json meta;
  meta["map"] = args.map.string();
  meta["highways"] = args.highways;
  meta["seed"] = cfg.seed;
  meta["steps"] = gt.poses.size();
  meta["scenario"] = to_json(cfg, true);
  write_json(args.out / "scenario.json", meta);
  log << gt.poses.size() << " steps written to " << args.out.string() << " in " << seconds_since(t0) << " s\n";
}

}  // namespace osmmcl::cli
