#pragma once

#include <numbers>
#include <span>

#include "osmmcl/rng.hpp"

namespace osmmcl {

/// Planar vehicle state in the map frame; theta in (-pi, pi].
struct Pose {
  double e = 0.0;
  double n = 0.0;
  double theta = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Pose change expressed in the frame of the pose at the start of the interval.
struct ControlInput {
  double de = 0.0;
  double dn = 0.0;
  double dtheta = 0.0;
};

struct OdometrySample {
  double v = 0.0;      // wheel speed, m/s
  double delta = 0.0;  // steering angle, rad, |delta| < pi/2
  double dt = 0.0;     // s, > 0
};

struct MotionNoise {
  double sigma_pos = 0.1;
  double sigma_theta = 3.0 * std::numbers::pi / 180.0;
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Forward-Euler kinematic bicycle integration starting from heading 0:
/// omega = v * tan(delta) / L, heading advanced first, then the displacement
/// v * dt along the new heading.
ControlInput integrate_odometry(std::span<const OdometrySample> samples, double wheelbase);

/// Applies u in the frame of `prev`, then adds zero-mean Gaussian noise to each position
/// component (sigma_pos) and to the heading (sigma_theta).
Pose propagate(const Pose& prev, const ControlInput& u, const MotionNoise& noise, Rng& rng);

/// Noise-free part of propagate().
Pose apply_control(const Pose& prev, const ControlInput& u);

}  // namespace osmmcl
