#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "frenet_racer/control.hpp"
#include "frenet_racer/planning.hpp"
#include "frenet_racer/rng.hpp"
#include "frenet_racer/td3.hpp"
#include "frenet_racer/track.hpp"
#include "frenet_racer/vehicle.hpp"

namespace frenet_racer {

enum class Algorithm { EndToEnd, Partial };

enum class EpisodeStatus { Running, Crashed, LapComplete, Timeout };

struct SimConfig {
  double dt = 0.01;           // physics step [s]
  double agent_period = 0.1;  // one agent decision per this much sim time [s]
  double timeout = 60.0;      // episode cap [s]

  void validate() const;
  long substeps() const;       // physics steps per agent step
  long timeout_steps() const;  // physics steps until timeout
};

struct EnvConfig {
  VehicleParams vehicle;       // nominal model (controllers believe this)
  VehicleConstraints constraints;
  LidarConfig lidar;
  SimConfig sim;
  PlannerConfig planner;
  ControllerConfig controller;
  RewardConstants reward;
  double vehicle_half_width = 0.10;
  // Gaussian noise applied to every normalized observation element
  // (evaluation protocol); 0 during training.
  double observation_noise_std = 0.0;
};

struct StepInfo {
  double sim_time = 0.0;  // after this agent step [s]
  double x = 0.0, y = 0.0, psi = 0.0, v = 0.0;
  double s = 0.0, n = 0.0;
  std::array<double, 2> action{0.0, 0.0};
  double reward = 0.0;
  EpisodeStatus status = EpisodeStatus::Running;
  double progress_total = 0.0;  // cumulative centerline distance D_t [m]
  double lap_time = 0.0;        // valid when status == LapComplete [s]
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// A racing episode: the single-track vehicle on a track, stepped at the agent
// period, with either the direct (end-to-end) or the planner+controller
// (partial) action interface.
class RaceEnv {
 public:
  RaceEnv(std::shared_ptr<const TrackGeometry> track, Algorithm algorithm,
          const EnvConfig& cfg);

  Algorithm algorithm() const { return algorithm_; }
  const EnvConfig& config() const { return cfg_; }
  const TrackGeometry& track() const { return *track_; }
  int observation_dim() const { return 4 + cfg_.lidar.n_beams; }

  // Start a new episode: random start point on the centerline, heading along
  // the tangent, v = v_min_allow.  The episode seed drives every random draw
  // of the episode (start point, sensor noise).
  std::vector<double> reset(std::uint64_t episode_seed,
                            const MismatchSpec& mismatch = {});

  // One agent step (dispatches on the configured algorithm).  Throws if the
  // episode is already over.
  StepResult step(const std::array<double, 2>& action);
  StepResult step_end_to_end(const std::array<double, 2>& action);
  StepResult step_partial(const std::array<double, 2>& action);

  // Normalized observation of the current state; noise (LiDAR +
  // observation) is applied only when with_noise is true.
  std::vector<double> build_observation(bool with_noise);

  EpisodeStatus status() const { return status_; }
  const VehicleState& vehicle_state() const { return state_; }
  const FrenetPose& frenet_pose() const { return frenet_; }
  const VehicleParams& effective_params() const { return effective_; }
  double total_progress() const { return progress_total_; }
  double sim_time() const;
  long physics_steps() const { return physics_steps_; }
  const std::optional<PlannedTrajectory>& active_trajectory() const {
    return trajectory_;
  }

 private:
  void require_running() const;
  // Advance physics by one agent period under a per-substep command policy.
  template <typename CommandFn>
  void run_substeps(CommandFn&& command);
  StepResult finish_step(const std::array<double, 2>& action,
                         double progress_before);

  std::shared_ptr<const TrackGeometry> track_;
  Algorithm algorithm_;
  EnvConfig cfg_;

  Rng rng_{0};
  VehicleParams effective_;
  VehicleState state_;
  FrenetPose frenet_;
  EpisodeStatus status_ = EpisodeStatus::Crashed;  // invalid until reset
  double progress_total_ = 0.0;
  long physics_steps_ = 0;
  double lap_time_ = 0.0;
  std::optional<PlannedTrajectory> trajectory_;
  bool has_reset_ = false;
};

}  // namespace frenet_racer
