#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frenet_racer/env.hpp"
#include "frenet_racer/td3.hpp"

namespace frenet_racer {

enum class SweepKind {
  Friction,
  StiffnessFront,
  StiffnessRear,
  StiffnessBoth,
  Mass,
};

std::string to_string(SweepKind kind);
SweepKind sweep_kind_from_string(const std::string& s);
std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& s);
std::string to_string(EpisodeStatus status);

struct SweepSpec {
  SweepKind kind = SweepKind::Friction;
  std::vector<double> values;     // mu / stiffness scales / masses [kg]
  std::vector<double> positions;  // mass sweep only: metres from rear axle
  int laps_per_cell = 100;

  void validate(const VehicleParams& nominal) const;
};

struct EvalSpec {
  int laps = 100;
  double observation_noise_std = 0.01;
};

// Everything a run needs, loadable from a JSON file.  Unknown keys are
// rejected so typos fail loudly.
struct RunConfig {
  Algorithm algorithm = Algorithm::Partial;
  std::string track = "porto";
  long total_steps = 100000;
  std::uint64_t seed = 1;
  int replicas = 1;
  std::string out_dir;
  long checkpoint_every = 25000;
  bool log_trajectories = false;

  Td3Config td3;
  ControllerConfig controller;
  PlannerConfig planner;
  RewardConstants reward;
  EvalSpec evaluation;
  VehicleParams vehicle;
  VehicleConstraints constraints;
  double vehicle_half_width = 0.10;
  LidarConfig lidar;
  SimConfig sim;
  MismatchSpec mismatch;           // applied at evaluation time
  std::optional<SweepSpec> sweep;

  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static RunConfig load_file(const std::string& path);

  // Environment configuration for training (no observation noise) or
  // evaluation (noise per the evaluation spec).
  EnvConfig env_config(bool evaluation_mode) const;
};

nlohmann::json mismatch_to_json(const MismatchSpec& spec);
MismatchSpec mismatch_from_json(const nlohmann::json& j);

// Resolve a track id like "porto" (or a direct path to a .csv file) to a
// file path.  Searches $FRENET_RACER_ASSETS, then ./assets, then the
// build-time default asset directory.
std::string resolve_track_path(const std::string& id_or_path);

}  // namespace frenet_racer
