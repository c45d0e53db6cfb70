#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osmmcl/cli.hpp"

namespace {

using osmmcl::Error;
using osmmcl::ErrorCode;
namespace cli = osmmcl::cli;

std::vector<double> parse_list(const std::string& text, std::size_t n, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, flag + ": '" + item + "' is not a number");
    }
  }
  if (out.size() != n) throw Error(ErrorCode::kInvalidArgument, flag + ": expected " + std::to_string(n) + " values");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Map-based Monte Carlo localization against OpenStreetMap road networks"};
  app.require_subcommand(1);
  app.fallthrough();

  int workers = 1;
  app.add_option("--workers", workers, "Worker threads; outputs do not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  cli::BuildFieldArgs bf;
  std::string bf_bounds;
  std::string bf_highways;
  auto* build = app.add_subcommand("build-field", "Rasterize the nearest-road distance field to an MCDF file");
  build->add_option("--map", bf.map, "OSM XML file")->required();
  build->add_option("--out", bf.out, "Output MCDF path")->required();
  build->add_option("--cell-size", bf.cell_size, "Cell size in meters")->capture_default_str();
  build->add_option("--margin", bf.margin, "Meters added around the map bounds")->capture_default_str();
  build->add_option("--bounds", bf_bounds, "Explicit bounds min_e,min_n,max_e,max_n in the map frame");
  build->add_option("--cell-budget", bf.cell_budget, "Maximum number of cells")->capture_default_str();
  build->add_option("--highways", bf_highways, "Comma-separated highway values to keep");

  cli::RunArgs run;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "Run the particle filter over a scenario");
  run_cmd->add_option("--config", run.config, "Run config JSON")->required();
  run_cmd->add_option("--out", run_out, "Output directory, overriding output_dir");
  run_cmd->add_flag("--sweep", run.sweep, "Run all four distance functions");

  cli::ProjectArgs pr;
  std::string fov_path;
  auto* project = app.add_subcommand("project", "Project a 3D point cloud to a 128x512 range image");
  project->add_option("--cloud", pr.cloud, "Cloud file (.csv or binary)")->required();
  project->add_option("--out", pr.out_prefix, "Output path prefix")->required();
  project->add_option("--fov", fov_path, "Field-of-view JSON");
  project->add_option("--azimuth-span", pr.fov.azimuth_span_deg, "Azimuth span in degrees")->capture_default_str();
  project->add_option("--azimuth-res", pr.fov.azimuth_resolution_deg, "Column width in degrees")
      ->capture_default_str();
  project->add_option("--min-alt", pr.fov.min_altitude_deg, "Lowest altitude in degrees")->capture_default_str();
  project->add_option("--max-alt", pr.fov.max_altitude_deg, "Highest altitude in degrees")->capture_default_str();

  cli::GenScenarioArgs gs;
  std::string gs_config;
  std::string gs_highways;
  std::uint64_t gs_seed = 0;
  auto* gen = app.add_subcommand("gen-scenario", "Simulate a trajectory with scans and write a replay directory");
  gen->add_option("--map", gs.map, "OSM XML file")->required();
  gen->add_option("--out", gs.out, "Replay directory")->required();
  gen->add_option("--config", gs_config, "Scenario config JSON");
  auto* seed_opt = gen->add_option("--seed", gs_seed, "Seed, overriding the config");
  gen->add_option("--highways", gs_highways, "Comma-separated highway values to keep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitInvalid;
  }

  try {
    if (*build) {
      bf.workers = workers;
      bf.highways = split_names(bf_highways);
      if (!bf_bounds.empty()) {
        const auto b = parse_list(bf_bounds, 4, "--bounds");
        bf.bounds = osmmcl::Rect{b[0], b[1], b[2], b[3]};
      }
      cli::cmd_build_field(bf, std::cout);
    } else if (*run_cmd) {
      run.workers = workers;
      if (!run_out.empty()) run.out = run_out;
      cli::cmd_run(run, std::cout);
    } else if (*project) {
      if (!fov_path.empty()) {
        std::ifstream in(fov_path);
        if (!in) throw Error(ErrorCode::kInvalidArgument, "--fov: cannot open " + fov_path);
        cli::Json j;
        try {
          j = cli::Json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorCode::kInvalidArgument, "--fov: not valid JSON (" + std::string(e.what()) + ")");
        }
        pr.fov = cli::parse_fov(j, "fov");
      }
      cli::cmd_project(pr, std::cout);
    } else if (*gen) {
      gs.workers = workers;
      gs.highways = split_names(gs_highways);
      if (!gs_config.empty()) gs.config = gs_config;
      if (*seed_opt) gs.seed = gs_seed;
      cli::cmd_gen_scenario(gs, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitRuntime;
  }
  return cli::kExitOk;
}
