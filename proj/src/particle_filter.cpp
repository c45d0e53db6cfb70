#include "osmmcl/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "osmmcl/error.hpp"
#include "osmmcl/parallel.hpp"

namespace osmmcl {

InitSpec InitSpec::tracking(Pose center, double radius, std::size_t count) {
  InitSpec s;
  s.mode = InitMode::kTracking;
  s.center = center;
  s.radius = radius;
  s.count = count;
  return s;
}

InitSpec InitSpec::global(Rect area, std::size_t count) {
  InitSpec s;
  s.mode = InitMode::kGlobal;
  s.area = area;
  s.count = count;
  return s;
}

void InitSpec::validate() const {
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "init.count must be > 0");
  if (mode == InitMode::kTracking && !(radius > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "init.radius must be > 0");
  }
  if (mode == InitMode::kGlobal && area.degenerate()) {
    throw Error(ErrorCode::kInvalidArgument, "init.area must be a non-degenerate rectangle");
  }
}

ParticleSet initialize(const InitSpec& spec, std::uint64_t seed, std::uint64_t resample_interval) {
  spec.validate();
  if (resample_interval == 0) throw Error(ErrorCode::kInvalidArgument, "resample_interval must be > 0");
  ParticleSet s;
  s.seed = seed;
  s.resample_interval = resample_interval;
  s.particles.resize(spec.count);
  Rng rng = make_rng(seed, Stream::kInitialize);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
  for (auto& p : s.particles) {
    if (spec.mode == InitMode::kTracking) {
      const double r = spec.radius * std::sqrt(unit(rng));
      const double a = 2.0 * std::numbers::pi * unit(rng);
      p.pose.e = spec.center.e + r * std::cos(a);
      p.pose.n = spec.center.n + r * std::sin(a);
    } else {
      p.pose.e = spec.area.min_e + spec.area.width() * unit(rng);
      p.pose.n = spec.area.min_n + spec.area.height() * unit(rng);
    }
    p.pose.theta = normalize_angle(heading(rng));
    p.log_weight = 0.0;
  }
  return s;
}

std::vector<double> normalized_weights(const ParticleSet& s) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for (const auto& p : s.particles) max_lw = std::max(max_lw, p.log_weight);
  std::vector<double> w(s.particles.size());
  if (!std::isfinite(max_lw)) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    return w;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(s.particles[i].log_weight - max_lw);
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

Pose weighted_mean_pose(const ParticleSet& s) {
  const auto w = normalized_weights(s);
  double e = 0.0;
  double n = 0.0;
  double sin_sum = 0.0;
  double cos_sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& pose = s.particles[i].pose;
    e += w[i] * pose.e;
    n += w[i] * pose.n;
    sin_sum += w[i] * std::sin(pose.theta);
    cos_sum += w[i] * std::cos(pose.theta);
  }
  const double theta = (sin_sum == 0.0 && cos_sum == 0.0) ? 0.0 : normalize_angle(std::atan2(sin_sum, cos_sum));
  return {e, n, theta};
}

namespace {

Pose max_weight_pose(const ParticleSet& s) {
  const auto best = std::max_element(s.particles.begin(), s.particles.end(),
                                     [](const Particle& a, const Particle& b) { return a.log_weight < b.log_weight; });
  return best->pose;
}

}  // namespace

double particle_spread(const ParticleSet& s, MapPoint center) {
  double sum = 0.0;
  for (const auto& p : s.particles) {
    const double de = p.pose.e - center.e;
    const double dn = p.pose.n - center.n;
    sum += de * de + dn * dn;
  }
  return std::sqrt(sum / static_cast<double>(s.particles.size()));
}

bool systematic_resample(ParticleSet& s, Rng& rng, bool degenerate) {
  const std::size_t count = s.particles.size();
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "cannot resample an empty particle set");
  double max_lw = -std::numeric_limits<double>::infinity();
  for (const auto& p : s.particles) max_lw = std::max(max_lw, p.log_weight);

  std::vector<double> w(count, 1.0);
  const bool usable = !degenerate && std::isfinite(max_lw);
  if (usable) {
    for (std::size_t i = 0; i < count; ++i) w[i] = std::exp(s.particles[i].log_weight - max_lw);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  const double spacing = total / static_cast<double>(count);
  const double offset = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

  std::vector<Particle> out;
  out.reserve(count);
  std::size_t i = 0;
  double cumulative = w[0];
  for (std::size_t j = 0; j < count; ++j) {
    const double target = (static_cast<double>(j) + offset) * spacing;
    while (target >= cumulative && i + 1 < count) cumulative += w[++i];
    out.push_back(Particle{s.particles[i].pose, 0.0});
  }
  s.particles = std::move(out);
  return usable;
}

StepResult step(ParticleSet& s, const ControlInput& u, const SegmentedPointCloud& z, const PoseScorer& scorer,
                const FilterOptions& options) {
  if (s.particles.empty()) throw Error(ErrorCode::kInvalidArgument, "particle set is empty");
  ++s.step_count;

  const std::size_t count = s.particles.size();
  const std::size_t blocks = (count + kParticleBlock - 1) / kParticleBlock;
  const double floor_score = static_cast<double>(z.points.size()) * scorer.floor_log_weight();
  std::vector<std::uint8_t> block_all_floor(blocks, 1);

  parallel_for_blocks(blocks, options.workers, [&](std::size_t b) {
    Rng rng = make_rng(s.seed, Stream::kPropagate, s.step_count, b);
    const std::size_t end = std::min(count, (b + 1) * kParticleBlock);
    bool all_floor = true;
    for (std::size_t i = b * kParticleBlock; i < end; ++i) {
      auto& p = s.particles[i];
      p.pose = propagate(p.pose, u, options.noise, rng);
      const double score = scorer.score(p.pose, z);
      p.log_weight += score;
      all_floor = all_floor && score <= floor_score;
    }
    block_all_floor[b] = all_floor ? 1 : 0;
  });

  StepResult result;
  result.degenerate =
      !z.points.empty() && std::all_of(block_all_floor.begin(), block_all_floor.end(), [](auto v) { return v != 0; });
  result.estimate = options.estimator == Estimator::kMaxWeight ? max_weight_pose(s) : weighted_mean_pose(s);

  if (s.resample_interval > 0 && s.step_count % s.resample_interval == 0) {
    Rng rng = make_rng(s.seed, Stream::kResample, s.step_count);
    systematic_resample(s, rng, result.degenerate);
    result.resampled = true;
  }
  result.spread_m = particle_spread(s, {result.estimate.e, result.estimate.n});
  return result;
}

std::optional<std::size_t> first_sustained_below(const std::vector<double>& values, double threshold,
                                                 std::size_t sustain) {
  std::size_t run = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    run = values[i] < threshold ? run + 1 : 0;
    if (run >= std::max<std::size_t>(1, sustain)) return i + 1 - run;
  }
  return std::nullopt;
}

Trace run_scenario(const Scenario& scenario, const PoseScorer& scorer, const InitSpec& init, std::uint64_t seed,
                   const FilterOptions& options, const ConvergenceCriterion& criterion) {
  if (scenario.steps.empty()) throw Error(ErrorCode::kInvalidArgument, "scenario has no steps");
  ParticleSet set = initialize(init, seed, options.resample_interval);

  Trace trace;
  trace.records.reserve(scenario.steps.size());
  for (std::size_t k = 0; k < scenario.steps.size(); ++k) {
    const auto& st = scenario.steps[k];
    const StepResult r = options.voxel_size > 0.0
                             ? step(set, st.control, downsample_voxel(st.scan, options.voxel_size), scorer, options)
                             : step(set, st.control, st.scan, scorer, options);
    TraceRecord rec;
    rec.step = k;
    rec.estimate = r.estimate;
    rec.ground_truth = st.ground_truth;
    rec.error_m = std::hypot(r.estimate.e - st.ground_truth.e, r.estimate.n - st.ground_truth.n);
    rec.spread_m = r.spread_m;
    rec.resampled = r.resampled;
    rec.degenerate = r.degenerate;
    trace.records.push_back(rec);
  }

  std::vector<double> spreads;
  std::vector<double> errors;
  for (const auto& rec : trace.records) {
    spreads.push_back(rec.spread_m);
    errors.push_back(rec.error_m);
    if (rec.degenerate) ++trace.summary.degenerate_steps;
  }
  auto mean_from = [&](std::size_t first) {
    double sum = 0.0;
    for (std::size_t i = first; i < errors.size(); ++i) sum += errors[i];
    return sum / static_cast<double>(errors.size() - first);
  };
  auto& sum = trace.summary;
  sum.mean_error_all = mean_from(0);
  sum.final_error = errors.back();
  if (auto c = first_sustained_below(spreads, criterion.spread_threshold_m, criterion.sustain_steps)) {
    sum.convergence_step = *c;
    sum.mean_error_post_convergence = mean_from(*c);
  }
  if (auto c = first_sustained_below(errors, criterion.spread_threshold_m, criterion.sustain_steps)) {
    sum.error_convergence_step = *c;
    sum.mean_error_post_error_convergence = mean_from(*c);
  }
  return trace;
}

}  // namespace osmmcl
