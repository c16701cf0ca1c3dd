#include "frenet_racer/env.hpp"

#include <cmath>

#include "frenet_racer/errors.hpp"

namespace frenet_racer {

void SimConfig::validate() const {
  if (!(dt > 0.0 && dt <= 0.02)) {
    throw ValidationError("physics dt must be in (0, 0.02]");
  }
  if (substeps() < 1) {
    throw ValidationError("agent_period must be at least one physics step");
  }
  if (std::abs(substeps() * dt - agent_period) > 1e-9) {
    throw ValidationError("agent_period must be a multiple of dt");
  }
  if (!(timeout > 0.0)) throw ValidationError("timeout must be > 0");
}

long SimConfig::substeps() const { return std::lround(agent_period / dt); }

long SimConfig::timeout_steps() const { return std::lround(timeout / dt); }

RaceEnv::RaceEnv(std::shared_ptr<const TrackGeometry> track,
                 Algorithm algorithm, const EnvConfig& cfg)
    : track_(std::move(track)), algorithm_(algorithm), cfg_(cfg) {
  if (!track_) throw ValidationError("environment needs a track");
  cfg_.vehicle.validate();
  cfg_.constraints.validate();
  cfg_.sim.validate();
  if (cfg_.vehicle_half_width <= 0.0) {
    throw ValidationError("vehicle_half_width must be > 0");
  }
  if (cfg_.observation_noise_std < 0.0 || cfg_.lidar.noise_std < 0.0) {
    throw ValidationError("noise stds must be >= 0");
  }
  effective_ = cfg_.vehicle;
}

double RaceEnv::sim_time() const { return physics_steps_ * cfg_.sim.dt; }

std::vector<double> RaceEnv::reset(std::uint64_t episode_seed,
                                   const MismatchSpec& mismatch) {
  rng_ = Rng(episode_seed);
  effective_ = apply_mismatch(cfg_.vehicle, mismatch);

  const double s0 = rng_.uniform() * track_->total_length();
  const CartesianPoint start = track_->to_cartesian(s0, 0.0);
  state_ = VehicleState{};
  state_.x = start.x;
  state_.y = start.y;
  state_.psi = start.tangent_heading;
  state_.v = cfg_.constraints.v_min_allow;
  frenet_ = track_->to_frenet(state_.x, state_.y, state_.psi);

  status_ = EpisodeStatus::Running;
  progress_total_ = 0.0;
  physics_steps_ = 0;
  lap_time_ = 0.0;
  trajectory_.reset();
  has_reset_ = true;

  return build_observation(true);
}

void RaceEnv::require_running() const {
  if (!has_reset_) {
    throw ValidationError("step called before reset");
  }
  if (status_ != EpisodeStatus::Running) {
    throw ValidationError("step called after the episode ended");
  }
}

template <typename CommandFn>
void RaceEnv::run_substeps(CommandFn&& command) {
  const long substeps = cfg_.sim.substeps();
  const long timeout_steps = cfg_.sim.timeout_steps();
  for (long k = 0; k < substeps; ++k) {
    const InputCommand cmd = command(state_);
    state_ = step_vehicle(state_, cmd, effective_, cfg_.constraints,
                          cfg_.sim.dt);
    ++physics_steps_;

    const double s_prev = frenet_.s;
    bool out_of_corridor = false;
    try {
      frenet_ = track_->to_frenet(state_.x, state_.y, state_.psi);
    } catch (const OutOfCorridorError&) {
      out_of_corridor = true;
    }
    if (out_of_corridor) {
      status_ = EpisodeStatus::Crashed;
      return;
    }
    progress_total_ += track_->progress(s_prev, frenet_.s);

    if (track_->check_collision(frenet_, cfg_.vehicle_half_width)) {
      status_ = EpisodeStatus::Crashed;
      return;
    }
    if (track_->closed() && progress_total_ >= track_->total_length()) {
      status_ = EpisodeStatus::LapComplete;
      lap_time_ = sim_time();
      return;
    }
    if (physics_steps_ >= timeout_steps) {
      status_ = EpisodeStatus::Timeout;
      return;
    }
  }
}

StepResult RaceEnv::finish_step(const std::array<double, 2>& action,
                                double progress_before) {
  StepResult out;
  out.reward = compute_reward(progress_total_ - progress_before,
                              status_ == EpisodeStatus::Crashed, cfg_.reward);
  out.done = status_ != EpisodeStatus::Running;
  out.observation = build_observation(true);

  out.info.sim_time = sim_time();
  out.info.x = state_.x;
  out.info.y = state_.y;
  out.info.psi = state_.psi;
  out.info.v = state_.v;
  out.info.s = frenet_.s;
  out.info.n = frenet_.n;
  out.info.action = action;
  out.info.reward = out.reward;
  out.info.status = status_;
  out.info.progress_total = progress_total_;
  out.info.lap_time = lap_time_;
  return out;
}

StepResult RaceEnv::step(const std::array<double, 2>& action) {
  return algorithm_ == Algorithm::EndToEnd ? step_end_to_end(action)
                                           : step_partial(action);
}

StepResult RaceEnv::step_end_to_end(const std::array<double, 2>& action) {
  require_running();
  const double a0 = clamp(action[0], -1.0, 1.0);
  const double a1 = clamp(action[1], -1.0, 1.0);
  const VehicleConstraints& c = cfg_.constraints;
  const double a_long_d = a0 * c.a_max;
  const double delta_d = c.delta_min + 0.5 * (a1 + 1.0) *
                                           (c.delta_max - c.delta_min);
  const double progress_before = progress_total_;
  run_substeps([&](const VehicleState& s) {
    InputCommand cmd;
    cmd.a_long_d = velocity_constraint(a_long_d, s.v, c);
    cmd.delta_d = delta_d;
    return cmd;
  });
  return finish_step({a0, a1}, progress_before);
}

StepResult RaceEnv::step_partial(const std::array<double, 2>& action) {
  require_running();
  const double lat = clamp(action[0], -1.0, 1.0);
  const double vel = clamp(action[1], -1.0, 1.0);
  const VehicleConstraints& c = cfg_.constraints;

  try {
    trajectory_ = plan(frenet_, lat, vel, *track_, c, cfg_.planner);
  } catch (const HeadingDegenerateError&) {
    // Keep tracking the previous trajectory; with none, fall back to a short
    // straight-ahead path at the action's requested speed.
    if (!trajectory_.has_value()) {
      PlannedTrajectory fallback;
      fallback.v_d = c.v_min_allow +
                     0.5 * (vel + 1.0) * (c.v_max_allow - c.v_min_allow);
      const double ch = std::cos(state_.psi);
      const double sh = std::sin(state_.psi);
      const int samples = std::max(cfg_.planner.samples, 2);
      for (int k = 0; k < samples; ++k) {
        const double d = kPlanHorizon * static_cast<double>(k) / (samples - 1);
        fallback.points.push_back(
            {state_.x + d * ch, state_.y + d * sh});
      }
      trajectory_ = std::move(fallback);
    }
  }

  const PlannedTrajectory& traj = *trajectory_;
  const double wheelbase = cfg_.vehicle.wheelbase();  // controller's belief
  const double progress_before = progress_total_;
  run_substeps([&](const VehicleState& s) {
    InputCommand cmd;
    cmd.delta_d = pure_pursuit_steer(traj, s.x, s.y, s.psi, wheelbase,
                                     cfg_.controller.lookahead, c);
    const double a_d = velocity_command(traj.v_d, s.v, cfg_.controller.k_v, c);
    cmd.a_long_d = velocity_constraint(a_d, s.v, c);
    return cmd;
  });
  return finish_step({lat, vel}, progress_before);
}

std::vector<double> RaceEnv::build_observation(bool with_noise) {
  if (!has_reset_) throw ValidationError("observation requested before reset");
  const TrackGeometry::Bounds& bb = track_->bounds();
  std::vector<double> obs;
  obs.reserve(observation_dim());

  const double dx = bb.max_x - bb.min_x;
  const double dy = bb.max_y - bb.min_y;
  obs.push_back(clamp((state_.x - bb.min_x) / dx, 0.0, 1.0));
  obs.push_back(clamp((state_.y - bb.min_y) / dy, 0.0, 1.0));
  obs.push_back((wrap_angle(state_.psi) + M_PI) / (2.0 * M_PI));
  obs.push_back(clamp(state_.v / cfg_.constraints.v_max_allow, 0.0, 1.0));

  LidarConfig lidar = cfg_.lidar;
  if (!with_noise) lidar.noise_std = 0.0;
  const std::vector<double> ranges =
      track_->lidar_scan(state_.x, state_.y, state_.psi, lidar, rng_);
  for (double r : ranges) obs.push_back(r / lidar.max_range);

  if (with_noise && cfg_.observation_noise_std > 0.0) {
    for (double& v : obs) {
      v = clamp(v + cfg_.observation_noise_std * rng_.normal(), 0.0, 1.0);
    }
  }
  return obs;
}

}  // namespace frenet_racer
