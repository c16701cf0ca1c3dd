#pragma once

#include <array>
#include <optional>

namespace frenet_racer {

// Single-track model parameters (F1tenth-scale defaults).
struct VehicleParams {
  double m = 3.74;         // mass [kg]
  double I_z = 0.04712;    // yaw inertia [kg m^2]
  double l_f = 0.1587;     // CoG to front axle [m]
  double l_r = 0.17145;    // CoG to rear axle [m]
  double h_cg = 0.074;     // CoG height [m]
  double C_Sf = 4.718;     // front cornering stiffness [1/rad]
  double C_Sr = 5.4562;    // rear cornering stiffness [1/rad]
  double mu = 1.0489;      // tyre-road friction coefficient

  double wheelbase() const { return l_f + l_r; }
  void validate() const;
};

// Actuator and operating limits.
struct VehicleConstraints {
  double delta_min = -0.4189;   // steering angle [rad]
  double delta_max = 0.4189;
  double ddelta_min = -3.2;     // steering rate [rad/s]
  double ddelta_max = 3.2;
  double v_min_model = -5.0;    // model validity range [m/s]
  double v_max_model = 20.0;
  double a_max = 9.51;          // peak longitudinal acceleration [m/s^2]
  double v_switch = 7.319;      // accel derating corner speed [m/s]
  double v_max_allow = 5.0;     // driving-policy speed window [m/s]
  double v_min_allow = 3.0;

  void validate() const;
};

// State of the single-track model.
struct VehicleState {
  double x = 0.0;        // position [m]
  double y = 0.0;
  double delta = 0.0;    // steering angle [rad]
  double v = 0.0;        // speed along the body direction [m/s]
  double psi = 0.0;      // yaw [rad]
  double psi_dot = 0.0;  // yaw rate [rad/s]
  double beta = 0.0;     // slip angle at CoG [rad]
};

// Desired command: longitudinal acceleration and steering angle.
struct InputCommand {
  double a_long_d = 0.0;
  double delta_d = 0.0;
};

// Post-constraint inputs actually integrated: acceleration and steering rate.
struct EffectiveInput {
  double a = 0.0;
  double delta_rate = 0.0;
};

// A point mass bolted onto the chassis at distance `position` forward of the
// rear axle (so position = l_r places it at the nominal CoG).
struct AddedMass {
  double mass = 0.0;      // [kg]
  double position = 0.0;  // [m], in [0, wheelbase]
};

// What differs between the true (simulated) vehicle and the nominal model the
// controller believes in.
struct MismatchSpec {
  std::optional<double> mu_override;
  double c_sf_scale = 1.0;
  double c_sr_scale = 1.0;
  std::optional<AddedMass> added_mass;

  bool is_identity() const;
  void validate(double wheelbase) const;
};

// Map desired (accel, steering angle) to the constrained (accel, steering
// rate) pair the model integrates.  Steering: angle clamped to its range, rate
// limited, and zeroed when pushing past a saturated limit.  Acceleration:
// derated above v_switch, clamped to +-a_max, zeroed when pushing past the
// model speed range, and bounded so one step of dt cannot exit that range.
EffectiveInput constrain_inputs(const VehicleState& state,
                                const InputCommand& cmd,
                                const VehicleConstraints& limits, double dt);

// One RK4 step of dt with the constrained inputs held constant.  Blends the
// kinematic and dynamic single-track models over |v| in [0.5, 1.0] m/s.
// Throws IntegrationError if the state becomes non-finite.
VehicleState step_vehicle(const VehicleState& state, const InputCommand& cmd,
                          const VehicleParams& params,
                          const VehicleConstraints& limits, double dt);

// Time derivative of the state under already-constrained inputs.  Exposed for
// testing.
std::array<double, 7> state_derivative(const std::array<double, 7>& x,
                                       double a, double delta_rate,
                                       const VehicleParams& params);

// Physical parameters of the perturbed vehicle: friction override, stiffness
// scaling, and added mass (shifts CoG, re-splits the wheelbase exactly, and
// updates yaw inertia by the parallel-axis theorem).
VehicleParams apply_mismatch(const VehicleParams& nominal,
                             const MismatchSpec& spec);

}  // namespace frenet_racer
