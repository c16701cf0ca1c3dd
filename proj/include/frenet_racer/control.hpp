#pragma once

#include "frenet_racer/planning.hpp"
#include "frenet_racer/vehicle.hpp"

namespace frenet_racer {

struct ControllerConfig {
  double k_v = 1.0;        // velocity controller gain
  double lookahead = 0.6;  // pure pursuit lookahead distance [m]
};

// Pure pursuit steering: chases the first path point ahead of the vehicle
// that is at least `lookahead` away (or the last point when none qualifies),
// turning the chord into a curvature command.
double pure_pursuit_steer(const PlannedTrajectory& path, double x, double y,
                          double heading, double wheelbase, double lookahead,
                          const VehicleConstraints& constraints);

// Proportional speed controller with asymmetric normalization: acceleration
// gain a_max/v_max_allow, braking gain a_max/v_min_allow.
double velocity_command(double v_d, double v, double k_v,
                        const VehicleConstraints& constraints);

// Speed-window supervisor: zeroes the acceleration command outside the
// allowable band [v_min_allow, v_max_allow].
double velocity_constraint(double a_long_d, double v,
                           const VehicleConstraints& constraints);

}  // namespace frenet_racer
