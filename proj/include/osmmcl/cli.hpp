#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "osmmcl/error.hpp"
#include "osmmcl/measurement_model.hpp"
#include "osmmcl/motion_model.hpp"
#include "osmmcl/particle_filter.hpp"
#include "osmmcl/range_projection.hpp"
#include "osmmcl/scenario.hpp"

namespace osmmcl::cli {

using Json = nlohmann::ordered_json;

/// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;

/// Exit code for a library error: bad input maps to kExitInvalid, everything else to
/// kExitRuntime.
int exit_code_for(ErrorCode code);

struct FieldConfig {
  /// MCDF file to load; empty builds the field on demand.
  std::string path;
  double cell_size = 2.0;
  /// Extra meters around the map bounds when building on demand.
  double margin = 100.0;
  std::uint64_t cell_budget = 100'000'000;
};

struct ScenarioSource {
  /// Replay directory; empty generates the scenario from `generate`.
  std::string replay;
  /// Generation parameters. Only `wheelbase` is used with a replay. The seed is always the
  /// run seed.
  ScenarioConfig generate;
};

struct InitConfig {
  InitMode mode = InitMode::kTracking;
  /// Tracking prior center; defaults to the first ground-truth pose.
  std::optional<Pose> center;
  double radius = 200.0;
  /// Global prior area; defaults to the map bounds.
  std::optional<Rect> area;
  std::size_t count = 10'000;
};

struct RunConfig {
  std::string map;
  /// Highway values to keep; empty keeps the default set.
  std::vector<std::string> highways;
  FieldConfig field;
  ScenarioSource scenario;
  InitConfig init;
  DistanceFunctionSpec distance_function;
  MotionNoise motion_noise;
  std::uint64_t resample_interval = 20;
  double voxel_size = 2.0;
  Estimator estimator = Estimator::kWeightedMean;
  ConvergenceCriterion convergence;
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  /// Directory that relative paths in the config resolve against.
  std::filesystem::path base_dir;

  [[nodiscard]] std::filesystem::path resolve(const std::string& path) const;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// Error(kInvalidArgument) whose message starts with the dotted field path.
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Normalized echo of every field with defaults filled in. Worker counts are not part of
/// the config, so outputs do not depend on them.
Json to_json(const RunConfig& cfg);

/// `prefix` names the object in error messages, e.g. "scenario".
ScenarioConfig parse_scenario_config(const Json& j, const std::string& prefix, bool allow_seed);
Json to_json(const ScenarioConfig& cfg, bool include_seed);

FieldOfView parse_fov(const Json& j, const std::string& prefix);
Json to_json(const FieldOfView& fov);

HighwayFilter highway_filter(const std::vector<std::string>& highways);

struct BuildFieldArgs {
  std::filesystem::path map;
  std::filesystem::path out;
  double cell_size = 2.0;
  double margin = 100.0;
  std::optional<Rect> bounds;
  std::uint64_t cell_budget = 100'000'000;
  std::vector<std::string> highways;
  int workers = 1;
};

/// Writes the MCDF file and a `<out>.json` sidecar describing how it was built. Nothing is
/// written when the build fails.
void cmd_build_field(const BuildFieldArgs& args, std::ostream& log);

struct RunArgs {
  std::filesystem::path config;
  /// Overrides the config's output_dir when set.
  std::optional<std::filesystem::path> out;
  bool sweep = false;
  int workers = 1;
};

/// Runs the configured filter and writes trace.csv and summary.json. With `sweep`, runs
/// all four distance functions into per-kind subdirectories and writes table.txt.
void cmd_run(const RunArgs& args, std::ostream& log);

struct ProjectArgs {
  std::filesystem::path cloud;
  std::filesystem::path out_prefix;
  FieldOfView fov;
};

/// Writes `<prefix>_{range,intensity,reflectivity}.pgm` and `<prefix>_occupancy.json`.
void cmd_project(const ProjectArgs& args, std::ostream& log);

struct GenScenarioArgs {
  std::filesystem::path map;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  std::vector<std::string> highways;
  int workers = 1;
};

/// Writes a replay directory plus scenario.json echoing the config and seed.
void cmd_gen_scenario(const GenScenarioArgs& args, std::ostream& log);

/// Results table with one row per distance function.
struct SweepRow {
  DistanceFunctionKind kind;
  RunSummary summary;
};
std::string format_sweep_table(const std::vector<SweepRow>& rows);

/// Trace CSV with the header step,est_e,est_n,est_theta,gt_e,gt_n,gt_theta,error_m,spread_m,resampled.
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Json summary_json(const RunSummary& summary, std::size_t steps, const RunConfig& cfg);

}  // namespace osmmcl::cli
