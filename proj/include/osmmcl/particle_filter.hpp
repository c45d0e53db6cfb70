#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "osmmcl/measurement_model.hpp"
#include "osmmcl/motion_model.hpp"
#include "osmmcl/rng.hpp"

namespace osmmcl {

struct Particle {
  Pose pose;
  double log_weight = 0.0;
};

/// Weighted pose hypotheses plus filter bookkeeping. Owned exclusively by the filter
/// between steps.
struct ParticleSet {
  std::vector<Particle> particles;
  std::uint64_t step_count = 0;
  std::uint64_t resample_interval = 20;
  std::uint64_t seed = 0;
};

enum class InitMode { kTracking, kGlobal };

struct InitSpec {
  InitMode mode = InitMode::kTracking;
  Pose center;          // tracking
  double radius = 200;  // tracking, m
  Rect area;            // global
  std::size_t count = 10'000;

  static InitSpec tracking(Pose center, double radius = 200.0, std::size_t count = 10'000);
  static InitSpec global(Rect area, std::size_t count = 100'000);
  void validate() const;
};

/// Positions uniform on the disk (tracking) or rectangle (global), headings uniform on
/// (-pi, pi], log-weights zero. Randomness comes from Stream::kInitialize of `seed`.
ParticleSet initialize(const InitSpec& spec, std::uint64_t seed, std::uint64_t resample_interval = 20);

enum class Estimator { kWeightedMean, kMaxWeight };

struct FilterOptions {
  MotionNoise noise;
  std::uint64_t resample_interval = 20;
  Estimator estimator = Estimator::kWeightedMean;
  /// Voxel size for downsampling each scan before scoring; 0 disables.
  double voxel_size = 2.0;
  int workers = 1;
};

/// Normalized weights softmax(log_weight).
std::vector<double> normalized_weights(const ParticleSet& s);

/// Weighted mean position and weighted circular-mean heading.
Pose weighted_mean_pose(const ParticleSet& s);
/// RMS distance of particle positions about `center`, each particle counted once.
double particle_spread(const ParticleSet& s, MapPoint center);

struct StepResult {
  Pose estimate;
  double spread_m = 0.0;
  bool resampled = false;
  /// Every particle scored the floor weight on every point of a non-empty scan.
  bool degenerate = false;
};

/// Particles are processed in blocks of this size, each block drawing from its own stream,
/// so results do not depend on the worker count.
inline constexpr std::size_t kParticleBlock = 1024;

/// One filter iteration: propagate, score, estimate, and every resample_interval steps
/// systematic resampling with weights reset to zero. The estimate uses the weights
/// accumulated before resampling. The scan is scored as given; callers downsample.
StepResult step(ParticleSet& s, const ControlInput& u, const SegmentedPointCloud& z, const PoseScorer& scorer,
                const FilterOptions& options);

/// Low-variance resampling from one uniform draw. Returns false when the weights are
/// degenerate (non-finite or flagged); particles are then kept as a uniform draw of the
/// current set. Log-weights are reset to zero either way.
bool systematic_resample(ParticleSet& s, Rng& rng, bool degenerate = false);

struct ScenarioStep {
  ControlInput control;
  SegmentedPointCloud scan;
  Pose ground_truth;
};

struct Scenario {
  std::vector<ScenarioStep> steps;
};

struct TraceRecord {
  std::uint64_t step = 0;
  Pose estimate;
  Pose ground_truth;
  double error_m = 0.0;
  double spread_m = 0.0;
  bool resampled = false;
  bool degenerate = false;
};

struct ConvergenceCriterion {
  double spread_threshold_m = 25.0;
  std::size_t sustain_steps = 10;
};

struct RunSummary {
  std::optional<std::uint64_t> convergence_step;
  std::optional<double> mean_error_post_convergence;
  /// Same rule applied to the error against ground truth instead of the spread.
  std::optional<std::uint64_t> error_convergence_step;
  std::optional<double> mean_error_post_error_convergence;
  double mean_error_all = 0.0;
  double final_error = 0.0;
  std::size_t degenerate_steps = 0;
};

struct Trace {
  std::vector<TraceRecord> records;
  RunSummary summary;
};

/// First index i such that values[i..i+sustain) are all below threshold.
std::optional<std::size_t> first_sustained_below(const std::vector<double>& values, double threshold,
                                                 std::size_t sustain);

/// Runs the filter over every scenario step. Throws Error(kInvalidArgument) for an empty
/// scenario.
Trace run_scenario(const Scenario& scenario, const PoseScorer& scorer, const InitSpec& init, std::uint64_t seed,
                   const FilterOptions& options, const ConvergenceCriterion& criterion = {});

}  // namespace osmmcl
