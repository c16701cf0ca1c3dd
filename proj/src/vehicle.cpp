#include "frenet_racer/vehicle.hpp"

#include <cmath>
#include <sstream>

#include "frenet_racer/errors.hpp"
#include "frenet_racer/geometry.hpp"

namespace frenet_racer {

namespace {
constexpr double kGravity = 9.81;
// Below this speed the dynamic model's 1/v terms are meaningless; blend to the
// kinematic bicycle model.
constexpr double kKinematicBelow = 0.5;
constexpr double kDynamicAbove = 1.0;
}  // namespace

void VehicleParams::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(m) || !positive(I_z) || !positive(l_f) || !positive(l_r) ||
      !positive(h_cg) || !positive(C_Sf) || !positive(C_Sr) || !positive(mu)) {
    throw ValidationError("vehicle parameters must all be positive and finite");
  }
}

void VehicleConstraints::validate() const {
  if (!(delta_min < 0.0 && 0.0 < delta_max)) {
    throw ValidationError("steering bounds must straddle zero");
  }
  if (!(ddelta_min < 0.0 && 0.0 < ddelta_max)) {
    throw ValidationError("steering-rate bounds must straddle zero");
  }
  if (!(v_min_model < v_max_model)) {
    throw ValidationError("model velocity bounds out of order");
  }
  if (!(a_max > 0.0) || !(v_switch > 0.0)) {
    throw ValidationError("a_max and v_switch must be positive");
  }
  if (!(v_min_allow < v_max_allow && v_max_allow <= v_max_model)) {
    throw ValidationError(
        "need v_min_allow < v_max_allow <= v_max_model");
  }
}

bool MismatchSpec::is_identity() const {
  return !mu_override.has_value() && c_sf_scale == 1.0 && c_sr_scale == 1.0 &&
         (!added_mass.has_value() || added_mass->mass == 0.0);
}

void MismatchSpec::validate(double wheelbase) const {
  if (mu_override.has_value() &&
      !(*mu_override > 0.0 && *mu_override <= 2.0)) {
    throw ValidationError("mu_override must be in (0, 2]");
  }
  const auto scale_ok = [](double s) { return s >= 0.5 && s <= 2.0; };
  if (!scale_ok(c_sf_scale) || !scale_ok(c_sr_scale)) {
    throw ValidationError("stiffness scales must be in [0.5, 2]");
  }
  if (added_mass.has_value()) {
    if (!(added_mass->mass >= 0.0) || !std::isfinite(added_mass->mass)) {
      throw ValidationError("added mass must be >= 0");
    }
    if (!(added_mass->position >= 0.0 &&
          added_mass->position <= wheelbase)) {
      throw ValidationError("added mass position must be in [0, wheelbase]");
    }
  }
}

EffectiveInput constrain_inputs(const VehicleState& state,
                                const InputCommand& cmd,
                                const VehicleConstraints& c, double dt) {
  EffectiveInput out;

  // Steering: track the commanded angle at a bounded rate; never push past
  // the angle range.
  const double delta_d = clamp(cmd.delta_d, c.delta_min, c.delta_max);
  double rate = clamp((delta_d - state.delta) / dt, c.ddelta_min, c.ddelta_max);
  if ((state.delta <= c.delta_min && rate < 0.0) ||
      (state.delta >= c.delta_max && rate > 0.0)) {
    rate = 0.0;
  }
  out.delta_rate = rate;

  // Acceleration: motor power derating above v_switch, hard cap at a_max.
  double pos_limit = c.a_max;
  if (state.v > c.v_switch) pos_limit = c.a_max * c.v_switch / state.v;
  double a = clamp(cmd.a_long_d, -c.a_max, pos_limit);
  if ((state.v <= c.v_min_model && a < 0.0) ||
      (state.v >= c.v_max_model && a > 0.0)) {
    a = 0.0;
  }
  // Guarantee one step cannot exit the model velocity range.
  a = clamp(a, (c.v_min_model - state.v) / dt, (c.v_max_model - state.v) / dt);
  out.a = a;
  return out;
}

std::array<double, 7> state_derivative(const std::array<double, 7>& x,
                                       double a, double delta_rate,
                                       const VehicleParams& p) {
  const double delta = x[2];
  const double v = x[3];
  const double psi = x[4];
  const double wz = x[5];
  const double beta = x[6];
  const double lwb = p.l_f + p.l_r;

  const double speed = std::abs(v);
  const double w = clamp((speed - kKinematicBelow) /
                             (kDynamicAbove - kKinematicBelow),
                         0.0, 1.0);

  std::array<double, 7> kin{};
  if (w < 1.0) {
    const double tan_d = std::tan(delta);
    kin = {v * std::cos(psi),
           v * std::sin(psi),
           delta_rate,
           a,
           v / lwb * tan_d,
           a / lwb * tan_d +
               v / (lwb * std::cos(delta) * std::cos(delta)) * delta_rate,
           0.0};
  }

  std::array<double, 7> dyn{};
  if (w > 0.0) {
    // Axle load factors including longitudinal load transfer.
    const double F_f = kGravity * p.l_r - a * p.h_cg;
    const double F_r = kGravity * p.l_f + a * p.h_cg;
    const double csf = p.C_Sf * F_f;
    const double csr = p.C_Sr * F_r;
    dyn = {v * std::cos(psi + beta),
           v * std::sin(psi + beta),
           delta_rate,
           a,
           wz,
           p.mu * p.m / (p.I_z * lwb) *
               (p.l_f * csf * delta + (p.l_r * csr - p.l_f * csf) * beta -
                (p.l_f * p.l_f * csf + p.l_r * p.l_r * csr) * wz / v),
           p.mu / (v * lwb) *
                   (csf * delta - (csr + csf) * beta +
                    (csr * p.l_r - csf * p.l_f) * wz / v) -
               wz};
  }

  std::array<double, 7> out{};
  for (int i = 0; i < 7; ++i) out[i] = (1.0 - w) * kin[i] + w * dyn[i];
  return out;
}

VehicleState step_vehicle(const VehicleState& state, const InputCommand& cmd,
                          const VehicleParams& params,
                          const VehicleConstraints& limits, double dt) {
  const EffectiveInput in = constrain_inputs(state, cmd, limits, dt);

  const std::array<double, 7> x0{state.x,   state.y,       state.delta,
                                 state.v,   state.psi,     state.psi_dot,
                                 state.beta};
  const auto f = [&](const std::array<double, 7>& x) {
    return state_derivative(x, in.a, in.delta_rate, params);
  };
  const auto add_scaled = [](const std::array<double, 7>& x,
                             const std::array<double, 7>& d, double h) {
    std::array<double, 7> y{};
    for (int i = 0; i < 7; ++i) y[i] = x[i] + h * d[i];
    return y;
  };

  const std::array<double, 7> k1 = f(x0);
  const std::array<double, 7> k2 = f(add_scaled(x0, k1, 0.5 * dt));
  const std::array<double, 7> k3 = f(add_scaled(x0, k2, 0.5 * dt));
  const std::array<double, 7> k4 = f(add_scaled(x0, k3, dt));

  std::array<double, 7> x1{};
  for (int i = 0; i < 7; ++i) {
    x1[i] = x0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  for (double v : x1) {
    if (!std::isfinite(v)) {
      std::ostringstream ss;
      ss << "integration produced a non-finite state from (x=" << state.x
         << ", y=" << state.y << ", delta=" << state.delta << ", v=" << state.v
         << ", psi=" << state.psi << ", psi_dot=" << state.psi_dot
         << ", beta=" << state.beta << ") with a=" << in.a
         << ", ddelta=" << in.delta_rate;
      throw IntegrationError(ss.str());
    }
  }

  VehicleState out;
  out.x = x1[0];
  out.y = x1[1];
  // The rate was chosen so the angle cannot exit its range; clamp to shave
  // rounding at the boundary.
  out.delta = clamp(x1[2], limits.delta_min, limits.delta_max);
  out.v = clamp(x1[3], limits.v_min_model, limits.v_max_model);
  out.psi = x1[4];
  out.psi_dot = x1[5];
  out.beta = x1[6];
  return out;
}

VehicleParams apply_mismatch(const VehicleParams& nominal,
                             const MismatchSpec& spec) {
  spec.validate(nominal.wheelbase());
  VehicleParams out = nominal;
  if (spec.mu_override.has_value()) out.mu = *spec.mu_override;
  out.C_Sf *= spec.c_sf_scale;
  out.C_Sr *= spec.c_sr_scale;
  if (spec.added_mass.has_value() && spec.added_mass->mass > 0.0) {
    const double m0 = nominal.m;
    const double ma = spec.added_mass->mass;
    const double p = spec.added_mass->position;
    const double L = nominal.l_f + nominal.l_r;
    const double m1 = m0 + ma;
    // New CoG measured from the rear axle.  Written as an offset from l_r so
    // that p == l_r gives exactly xi == l_r.
    const double xi = nominal.l_r + ma * (p - nominal.l_r) / m1;
    out.m = m1;
    out.I_z = nominal.I_z + m0 * (xi - nominal.l_r) * (xi - nominal.l_r) +
              ma * (p - xi) * (p - xi);
    // Split the wheelbase so l_f' + l_r' == l_f + l_r bitwise: one of the two
    // subtractions below is exact (Sterbenz), making the pair sum back to L.
    out.l_f = L - xi;
    out.l_r = L - out.l_f;
  }
  return out;
}

}  // namespace frenet_racer
