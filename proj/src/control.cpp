#include "frenet_racer/control.hpp"

#include <cmath>

#include "frenet_racer/errors.hpp"

namespace frenet_racer {

double pure_pursuit_steer(const PlannedTrajectory& path, double x, double y,
                          double heading, double wheelbase, double lookahead,
                          const VehicleConstraints& c) {
  if (path.points.empty()) {
    throw ValidationError("pure pursuit needs a non-empty path");
  }
  const Vec2 pos{x, y};
  const double ch = std::cos(heading);
  const double sh = std::sin(heading);
  // Chase the first point at least lookahead away that is still in front of
  // the vehicle; points already passed must not be re-targeted or the
  // controller chases its own tail.
  const Vec2 target = [&] {
    for (const Vec2& p : path.points) {
      const Vec2 d = p - pos;
      const double forward = ch * d.x + sh * d.y;
      if (forward > 0.0 && d.norm() >= lookahead) return p;
    }
    return path.points.back();
  }();

  // Vehicle frame: x forward, y left.
  const Vec2 rel = target - pos;
  const double y_l = -sh * rel.x + ch * rel.y;
  const double dist2 = rel.squared_norm();
  if (dist2 < 1e-12) return 0.0;
  const double curvature = 2.0 * y_l / dist2;
  return clamp(std::atan(wheelbase * curvature), c.delta_min, c.delta_max);
}

double velocity_command(double v_d, double v, double k_v,
                        const VehicleConstraints& c) {
  if (v_d >= v) return k_v * (c.a_max / c.v_max_allow) * (v_d - v);
  return k_v * (c.a_max / c.v_min_allow) * (v_d - v);
}

double velocity_constraint(double a_long_d, double v,
                           const VehicleConstraints& c) {
  if (v >= c.v_max_allow) return 0.0;
  // At the lower edge only further deceleration is blocked; otherwise the
  // vehicle could never leave its starting speed.
  if (v <= c.v_min_allow && a_long_d < 0.0) return 0.0;
  return a_long_d;
}

}  // namespace frenet_racer
