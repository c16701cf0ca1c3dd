#include "frenet_racer/planning.hpp"

#include <cmath>
#include <string>

#include "frenet_racer/errors.hpp"

namespace frenet_racer {

CubicPath solve_cubic_path(double s0, double n0, double psi0, double s1,
                           double n1) {
  if (!(s1 > s0)) {
    throw ValidationError("cubic path needs s1 > s0");
  }
  if (!(std::abs(psi0) < M_PI / 2.0)) {
    throw HeadingDegenerateError(
        "heading " + std::to_string(psi0) +
        " rad relative to the centerline has no cubic representation");
  }
  const double h = s1 - s0;
  const double slope0 = std::tan(psi0);
  // Hermite conditions in u = s - s0:
  //   f(0) = n0, f'(0) = slope0, f(h) = n1, f'(h) = 0.
  const double d = n1 - n0 - slope0 * h;
  CubicPath p;
  p.s0 = s0;
  p.s1 = s1;
  p.D = n0;
  p.C = slope0;
  p.A = -(slope0 * h + 2.0 * d) / (h * h * h);
  p.B = (3.0 * d + slope0 * h) / (h * h);
  return p;
}

PlannedTrajectory plan(const FrenetPose& frenet, double lateral_action,
                       double velocity_action, const TrackGeometry& track,
                       const VehicleConstraints& constraints,
                       const PlannerConfig& cfg) {
  if (cfg.samples < 2) throw ValidationError("planner needs >= 2 samples");

  const double lat = clamp(lateral_action, -1.0, 1.0);
  const double vel = clamp(velocity_action, -1.0, 1.0);

  const double s0 = frenet.s;
  const double s1 = s0 + kPlanHorizon;

  const auto corridor = [&](double s, double& lo, double& hi) {
    hi = std::max(track.width_left_at(s) - cfg.margin, 0.0);
    lo = -std::max(track.width_right_at(s) - cfg.margin, 0.0);
  };

  double lo1, hi1;
  corridor(s1, lo1, hi1);
  const double n1 = lat >= 0.0 ? lat * hi1 : -lat * lo1;

  const CubicPath path = solve_cubic_path(s0, frenet.n, frenet.psi, s1, n1);

  PlannedTrajectory out;
  out.v_d = constraints.v_min_allow +
            0.5 * (vel + 1.0) *
                (constraints.v_max_allow - constraints.v_min_allow);
  out.points.reserve(cfg.samples);
  for (int k = 0; k < cfg.samples; ++k) {
    const double s =
        s0 + kPlanHorizon * static_cast<double>(k) / (cfg.samples - 1);
    double lo, hi;
    corridor(s, lo, hi);
    const double n = clamp(path.offset(s), lo, hi);
    const CartesianPoint c = track.to_cartesian(s, n);
    const Vec2 pt{c.x, c.y};
    if (!out.points.empty() &&
        (pt - out.points.back()).squared_norm() < 1e-16) {
      continue;
    }
    out.points.push_back(pt);
  }
  return out;
}

}  // namespace frenet_racer
