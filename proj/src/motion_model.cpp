#include "osmmcl/motion_model.hpp"

#include <cmath>
#include <random>

#include "osmmcl/error.hpp"

namespace osmmcl {

double normalize_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

ControlInput integrate_odometry(std::span<const OdometrySample> samples, double wheelbase) {
  if (!(wheelbase > 0.0)) throw Error(ErrorCode::kInvalidArgument, "wheelbase must be positive");
  double theta = 0.0;
  ControlInput u;
  for (const auto& s : samples) {
    if (!(s.dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "odometry sample dt must be positive");
    if (!(std::abs(s.delta) < std::numbers::pi / 2)) {
      throw Error(ErrorCode::kInvalidArgument, "steering angle must satisfy |delta| < pi/2");
    }
    const double omega = s.v * std::tan(s.delta) / wheelbase;
    theta += omega * s.dt;
    u.de += s.v * std::cos(theta) * s.dt;
    u.dn += s.v * std::sin(theta) * s.dt;
  }
  u.dtheta = normalize_angle(theta);
  return u;
}

Pose apply_control(const Pose& prev, const ControlInput& u) {
  const double c = std::cos(prev.theta);
  const double s = std::sin(prev.theta);
  return {prev.e + c * u.de - s * u.dn, prev.n + s * u.de + c * u.dn, normalize_angle(prev.theta + u.dtheta)};
}

Pose propagate(const Pose& prev, const ControlInput& u, const MotionNoise& noise, Rng& rng) {
  Pose next = apply_control(prev, u);
  std::normal_distribution<double> unit(0.0, 1.0);
  if (noise.sigma_pos > 0.0) {
    next.e += noise.sigma_pos * unit(rng);
    next.n += noise.sigma_pos * unit(rng);
  }
  if (noise.sigma_theta > 0.0) next.theta = normalize_angle(next.theta + noise.sigma_theta * unit(rng));
  return next;
}

}  // namespace osmmcl
