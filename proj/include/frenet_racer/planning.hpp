#pragma once

#include <vector>

#include "frenet_racer/geometry.hpp"
#include "frenet_racer/track.hpp"
#include "frenet_racer/vehicle.hpp"

namespace frenet_racer {

// Lateral offset as a cubic in arclength: f(s) = A u^3 + B u^2 + C u + D with
// u = s - s0.  Storing coefficients in the shifted variable keeps them
// well-conditioned for any absolute s0 and makes the shape depend only on
// (n0, psi0, n1, s1 - s0).
struct CubicPath {
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0;
  double s0 = 0.0, s1 = 0.0;

  double offset(double s) const {
    const double u = s - s0;
    return ((A * u + B) * u + C) * u + D;
  }
  double slope(double s) const {
    const double u = s - s0;
    return (3.0 * A * u + 2.0 * B) * u + C;
  }
};

// Unique cubic with f(s0) = n0, f'(s0) = tan(psi0), f(s1) = n1, f'(s1) = 0.
// Throws HeadingDegenerateError when |psi0| >= pi/2.
CubicPath solve_cubic_path(double s0, double n0, double psi0, double s1,
                           double n1);

struct PlannerConfig {
  double margin = 0.15;  // kept clear of each wall [m]
  int samples = 20;      // points per planned trajectory
};

// What a trained policy hands to the tracking controller: a short Cartesian
// path and a target speed.
struct PlannedTrajectory {
  std::vector<Vec2> points;
  double v_d = 0.0;
};

// Expand a policy action into a trajectory: a cubic lateral profile from the
// current Frenet pose to a goal offset 2 m ahead (lateral_action scaled to
// the margin-shrunk corridor at s1), plus a target speed (velocity_action
// scaled to [v_min_allow, v_max_allow]).  Sampled offsets are clamped into
// the margin-shrunk corridor before mapping to Cartesian points.
PlannedTrajectory plan(const FrenetPose& frenet, double lateral_action,
                       double velocity_action, const TrackGeometry& track,
                       const VehicleConstraints& constraints,
                       const PlannerConfig& cfg);

// Planning horizon along the centerline [m].
inline constexpr double kPlanHorizon = 2.0;

}  // namespace frenet_racer
