#include "frenet_racer/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "frenet_racer/errors.hpp"

namespace frenet_racer {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& ctx, const std::string& msg) {
  throw ParseError("config: " + ctx + ": " + msg);
}

void check_keys(const json& j, const std::string& ctx,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(ctx, "expected a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (std::string_view k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(ctx, "unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read(const json& j, const std::string& ctx, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ctx, std::string("bad value for '") + key + "': " + e.what());
  }
}

json lidar_to_json(const LidarConfig& c) {
  return {{"n_beams", c.n_beams},
          {"fov", c.fov},
          {"max_range", c.max_range},
          {"noise_std", c.noise_std}};
}

LidarConfig lidar_from_json(const json& j) {
  LidarConfig c;
  check_keys(j, "lidar", {"n_beams", "fov", "max_range", "noise_std"});
  read(j, "lidar", "n_beams", c.n_beams);
  read(j, "lidar", "fov", c.fov);
  read(j, "lidar", "max_range", c.max_range);
  read(j, "lidar", "noise_std", c.noise_std);
  return c;
}

json vehicle_to_json(const VehicleParams& p) {
  return {{"m", p.m},     {"I_z", p.I_z},   {"l_f", p.l_f},
          {"l_r", p.l_r}, {"h_cg", p.h_cg}, {"C_Sf", p.C_Sf},
          {"C_Sr", p.C_Sr}, {"mu", p.mu}};
}

VehicleParams vehicle_from_json(const json& j) {
  VehicleParams p;
  check_keys(j, "vehicle",
             {"m", "I_z", "l_f", "l_r", "h_cg", "C_Sf", "C_Sr", "mu"});
  read(j, "vehicle", "m", p.m);
  read(j, "vehicle", "I_z", p.I_z);
  read(j, "vehicle", "l_f", p.l_f);
  read(j, "vehicle", "l_r", p.l_r);
  read(j, "vehicle", "h_cg", p.h_cg);
  read(j, "vehicle", "C_Sf", p.C_Sf);
  read(j, "vehicle", "C_Sr", p.C_Sr);
  read(j, "vehicle", "mu", p.mu);
  return p;
}

json constraints_to_json(const VehicleConstraints& c) {
  return {{"delta_min", c.delta_min},
          {"delta_max", c.delta_max},
          {"ddelta_min", c.ddelta_min},
          {"ddelta_max", c.ddelta_max},
          {"v_min_model", c.v_min_model},
          {"v_max_model", c.v_max_model},
          {"a_max", c.a_max},
          {"v_switch", c.v_switch},
          {"v_max_allow", c.v_max_allow},
          {"v_min_allow", c.v_min_allow}};
}

VehicleConstraints constraints_from_json(const json& j) {
  VehicleConstraints c;
  check_keys(j, "constraints",
             {"delta_min", "delta_max", "ddelta_min", "ddelta_max",
              "v_min_model", "v_max_model", "a_max", "v_switch",
              "v_max_allow", "v_min_allow"});
  read(j, "constraints", "delta_min", c.delta_min);
  read(j, "constraints", "delta_max", c.delta_max);
  read(j, "constraints", "ddelta_min", c.ddelta_min);
  read(j, "constraints", "ddelta_max", c.ddelta_max);
  read(j, "constraints", "v_min_model", c.v_min_model);
  read(j, "constraints", "v_max_model", c.v_max_model);
  read(j, "constraints", "a_max", c.a_max);
  read(j, "constraints", "v_switch", c.v_switch);
  read(j, "constraints", "v_max_allow", c.v_max_allow);
  read(j, "constraints", "v_min_allow", c.v_min_allow);
  return c;
}

json td3_to_json(const Td3Config& c) {
  return {{"gamma", c.gamma},
          {"tau", c.tau},
          {"exploration_noise_std", c.exploration_noise_std},
          {"target_noise_std", c.target_noise_std},
          {"target_noise_clip", c.target_noise_clip},
          {"policy_delay", c.policy_delay},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"buffer_capacity", c.buffer_capacity},
          {"warmup_steps", c.warmup_steps},
          {"hidden1", c.hidden1},
          {"hidden2", c.hidden2}};
}

Td3Config td3_from_json(const json& j) {
  Td3Config c;
  check_keys(j, "td3",
             {"gamma", "tau", "exploration_noise_std", "target_noise_std",
              "target_noise_clip", "policy_delay", "batch_size",
              "learning_rate", "buffer_capacity", "warmup_steps", "hidden1",
              "hidden2"});
  read(j, "td3", "gamma", c.gamma);
  read(j, "td3", "tau", c.tau);
  read(j, "td3", "exploration_noise_std", c.exploration_noise_std);
  read(j, "td3", "target_noise_std", c.target_noise_std);
  read(j, "td3", "target_noise_clip", c.target_noise_clip);
  read(j, "td3", "policy_delay", c.policy_delay);
  read(j, "td3", "batch_size", c.batch_size);
  read(j, "td3", "learning_rate", c.learning_rate);
  read(j, "td3", "buffer_capacity", c.buffer_capacity);
  read(j, "td3", "warmup_steps", c.warmup_steps);
  read(j, "td3", "hidden1", c.hidden1);
  read(j, "td3", "hidden2", c.hidden2);
  return c;
}

json sweep_to_json(const SweepSpec& s) {
  json j{{"kind", to_string(s.kind)},
         {"values", s.values},
         {"laps_per_cell", s.laps_per_cell}};
  if (s.kind == SweepKind::Mass) j["positions"] = s.positions;
  return j;
}

SweepSpec sweep_from_json(const json& j) {
  SweepSpec s;
  check_keys(j, "sweep", {"kind", "values", "positions", "laps_per_cell"});
  std::string kind = to_string(s.kind);
  read(j, "sweep", "kind", kind);
  s.kind = sweep_kind_from_string(kind);
  read(j, "sweep", "values", s.values);
  read(j, "sweep", "positions", s.positions);
  read(j, "sweep", "laps_per_cell", s.laps_per_cell);
  return s;
}

}  // namespace

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::Friction: return "friction";
    case SweepKind::StiffnessFront: return "stiffness_front";
    case SweepKind::StiffnessRear: return "stiffness_rear";
    case SweepKind::StiffnessBoth: return "stiffness_both";
    case SweepKind::Mass: return "mass";
  }
  return "friction";
}

SweepKind sweep_kind_from_string(const std::string& s) {
  if (s == "friction") return SweepKind::Friction;
  if (s == "stiffness_front") return SweepKind::StiffnessFront;
  if (s == "stiffness_rear") return SweepKind::StiffnessRear;
  if (s == "stiffness_both") return SweepKind::StiffnessBoth;
  if (s == "mass") return SweepKind::Mass;
  throw ParseError("unknown sweep kind '" + s +
                   "' (expected friction | stiffness_front | stiffness_rear "
                   "| stiffness_both | mass)");
}

std::string to_string(Algorithm algorithm) {
  return algorithm == Algorithm::EndToEnd ? "end_to_end" : "partial";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "end_to_end") return Algorithm::EndToEnd;
  if (s == "partial") return Algorithm::Partial;
  throw ParseError("unknown algorithm '" + s +
                   "' (expected end_to_end | partial)");
}

std::string to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::Running: return "running";
    case EpisodeStatus::Crashed: return "crashed";
    case EpisodeStatus::LapComplete: return "lap_complete";
    case EpisodeStatus::Timeout: return "timeout";
  }
  return "running";
}

void SweepSpec::validate(const VehicleParams& nominal) const {
  if (values.empty()) throw ValidationError("sweep: values must be non-empty");
  if (laps_per_cell < 1) {
    throw ValidationError("sweep: laps_per_cell must be >= 1");
  }
  constexpr double kTol = 1e-9;
  switch (kind) {
    case SweepKind::Friction:
      for (double v : values) {
        if (v < 0.5 - kTol || v > 1.0489 + kTol) {
          throw ValidationError(
              "sweep: friction values must lie in [0.5, 1.0489]");
        }
      }
      break;
    case SweepKind::StiffnessFront:
    case SweepKind::StiffnessRear:
    case SweepKind::StiffnessBoth:
      for (double v : values) {
        if (v < 0.8 - kTol || v > 1.2 + kTol) {
          throw ValidationError(
              "sweep: stiffness scales must lie in [0.8, 1.2]");
        }
      }
      break;
    case SweepKind::Mass: {
      for (double v : values) {
        const bool known = std::abs(v - 0.3) < kTol ||
                           std::abs(v - 0.5) < kTol ||
                           std::abs(v - 1.0) < kTol ||
                           std::abs(v - 1.5) < kTol;
        if (!known) {
          throw ValidationError(
              "sweep: masses must come from {0.3, 0.5, 1.0, 1.5} kg");
        }
      }
      if (positions.empty()) {
        throw ValidationError("sweep: mass sweep needs positions");
      }
      const double L = nominal.wheelbase();
      for (double p : positions) {
        if (p < 0.0 || p > L + kTol) {
          throw ValidationError(
              "sweep: mass positions must lie in [0, wheelbase]");
        }
      }
      break;
    }
  }
}

void RunConfig::validate() const {
  vehicle.validate();
  constraints.validate();
  td3.validate();
  sim.validate();
  if (track.empty()) throw ValidationError("config: track must be set");
  if (total_steps <= td3.warmup_steps) {
    throw ValidationError(
        "config: total_steps must exceed td3.warmup_steps");
  }
  if (replicas < 1) throw ValidationError("config: replicas must be >= 1");
  if (evaluation.laps < 1) {
    throw ValidationError("config: evaluation.laps must be >= 1");
  }
  if (evaluation.observation_noise_std < 0.0) {
    throw ValidationError("config: observation noise std must be >= 0");
  }
  if (checkpoint_every < 1) {
    throw ValidationError("config: checkpoint_every must be >= 1");
  }
  if (planner.samples < 2) {
    throw ValidationError("config: planner.samples must be >= 2");
  }
  if (planner.margin < 0.0) {
    throw ValidationError("config: planner.margin must be >= 0");
  }
  if (!(controller.lookahead > 0.0)) {
    throw ValidationError("config: controller.lookahead must be > 0");
  }
  if (!(vehicle_half_width > 0.0)) {
    throw ValidationError("config: vehicle_half_width must be > 0");
  }
  if (lidar.n_beams < 1 || !(lidar.max_range > 0.0) || !(lidar.fov > 0.0)) {
    throw ValidationError("config: bad lidar geometry");
  }
  mismatch.validate(vehicle.wheelbase());
  if (sweep.has_value()) sweep->validate(vehicle);
}

nlohmann::json mismatch_to_json(const MismatchSpec& spec) {
  json j = json::object();
  if (spec.mu_override.has_value()) j["mu_override"] = *spec.mu_override;
  j["c_sf_scale"] = spec.c_sf_scale;
  j["c_sr_scale"] = spec.c_sr_scale;
  if (spec.added_mass.has_value()) {
    j["added_mass"] = {{"mass", spec.added_mass->mass},
                       {"position", spec.added_mass->position}};
  }
  return j;
}

MismatchSpec mismatch_from_json(const nlohmann::json& j) {
  MismatchSpec spec;
  check_keys(j, "mismatch",
             {"mu_override", "c_sf_scale", "c_sr_scale", "added_mass"});
  if (j.contains("mu_override") && !j.at("mu_override").is_null()) {
    spec.mu_override = j.at("mu_override").get<double>();
  }
  read(j, "mismatch", "c_sf_scale", spec.c_sf_scale);
  read(j, "mismatch", "c_sr_scale", spec.c_sr_scale);
  if (j.contains("added_mass") && !j.at("added_mass").is_null()) {
    const json& a = j.at("added_mass");
    check_keys(a, "mismatch.added_mass", {"mass", "position"});
    AddedMass am;
    read(a, "mismatch.added_mass", "mass", am.mass);
    read(a, "mismatch.added_mass", "position", am.position);
    spec.added_mass = am;
  }
  return spec;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  check_keys(j, "<root>",
             {"algorithm", "track", "total_steps", "seed", "replicas",
              "out_dir", "checkpoint_every", "log_trajectories", "td3",
              "controller", "planner", "reward", "evaluation", "vehicle",
              "constraints", "vehicle_half_width", "lidar", "sim", "mismatch",
              "sweep"});
  std::string algo = to_string(c.algorithm);
  read(j, "<root>", "algorithm", algo);
  c.algorithm = algorithm_from_string(algo);
  read(j, "<root>", "track", c.track);
  read(j, "<root>", "total_steps", c.total_steps);
  read(j, "<root>", "seed", c.seed);
  read(j, "<root>", "replicas", c.replicas);
  read(j, "<root>", "out_dir", c.out_dir);
  read(j, "<root>", "checkpoint_every", c.checkpoint_every);
  read(j, "<root>", "log_trajectories", c.log_trajectories);
  if (j.contains("td3")) c.td3 = td3_from_json(j.at("td3"));
  if (j.contains("controller")) {
    const json& s = j.at("controller");
    check_keys(s, "controller", {"k_v", "lookahead"});
    read(s, "controller", "k_v", c.controller.k_v);
    read(s, "controller", "lookahead", c.controller.lookahead);
  }
  if (j.contains("planner")) {
    const json& s = j.at("planner");
    check_keys(s, "planner", {"margin", "samples"});
    read(s, "planner", "margin", c.planner.margin);
    read(s, "planner", "samples", c.planner.samples);
  }
  if (j.contains("reward")) {
    const json& s = j.at("reward");
    check_keys(s, "reward", {"r_collision", "r_dist", "r_time"});
    read(s, "reward", "r_collision", c.reward.r_collision);
    read(s, "reward", "r_dist", c.reward.r_dist);
    read(s, "reward", "r_time", c.reward.r_time);
  }
  if (j.contains("evaluation")) {
    const json& s = j.at("evaluation");
    check_keys(s, "evaluation", {"laps", "observation_noise_std"});
    read(s, "evaluation", "laps", c.evaluation.laps);
    read(s, "evaluation", "observation_noise_std",
         c.evaluation.observation_noise_std);
  }
  if (j.contains("vehicle")) c.vehicle = vehicle_from_json(j.at("vehicle"));
  if (j.contains("constraints")) {
    c.constraints = constraints_from_json(j.at("constraints"));
  }
  read(j, "<root>", "vehicle_half_width", c.vehicle_half_width);
  if (j.contains("lidar")) c.lidar = lidar_from_json(j.at("lidar"));
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    check_keys(s, "sim", {"dt", "agent_period", "timeout"});
    read(s, "sim", "dt", c.sim.dt);
    read(s, "sim", "agent_period", c.sim.agent_period);
    read(s, "sim", "timeout", c.sim.timeout);
  }
  if (j.contains("mismatch")) c.mismatch = mismatch_from_json(j.at("mismatch"));
  if (j.contains("sweep") && !j.at("sweep").is_null()) {
    c.sweep = sweep_from_json(j.at("sweep"));
  }
  return c;
}

nlohmann::json RunConfig::to_json() const {
  json j{{"algorithm", to_string(algorithm)},
         {"track", track},
         {"total_steps", total_steps},
         {"seed", seed},
         {"replicas", replicas},
         {"out_dir", out_dir},
         {"checkpoint_every", checkpoint_every},
         {"log_trajectories", log_trajectories},
         {"td3", td3_to_json(td3)},
         {"controller",
          {{"k_v", controller.k_v}, {"lookahead", controller.lookahead}}},
         {"planner",
          {{"margin", planner.margin}, {"samples", planner.samples}}},
         {"reward",
          {{"r_collision", reward.r_collision},
           {"r_dist", reward.r_dist},
           {"r_time", reward.r_time}}},
         {"evaluation",
          {{"laps", evaluation.laps},
           {"observation_noise_std", evaluation.observation_noise_std}}},
         {"vehicle", vehicle_to_json(vehicle)},
         {"constraints", constraints_to_json(constraints)},
         {"vehicle_half_width", vehicle_half_width},
         {"lidar", lidar_to_json(lidar)},
         {"sim",
          {{"dt", sim.dt},
           {"agent_period", sim.agent_period},
           {"timeout", sim.timeout}}},
         {"mismatch", mismatch_to_json(mismatch)}};
  if (sweep.has_value()) j["sweep"] = sweep_to_json(*sweep);
  return j;
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  return from_json(j);
}

EnvConfig RunConfig::env_config(bool evaluation_mode) const {
  EnvConfig e;
  e.vehicle = vehicle;
  e.constraints = constraints;
  e.lidar = lidar;
  e.sim = sim;
  e.planner = planner;
  e.controller = controller;
  e.reward = reward;
  e.vehicle_half_width = vehicle_half_width;
  e.observation_noise_std =
      evaluation_mode ? evaluation.observation_noise_std : 0.0;
  return e;
}

std::string resolve_track_path(const std::string& id_or_path) {
  namespace fs = std::filesystem;
  const auto exists = [](const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec);
  };
  if (id_or_path.size() > 4 &&
      id_or_path.substr(id_or_path.size() - 4) == ".csv") {
    if (exists(id_or_path)) return id_or_path;
    throw ParseError("track file not found: " + id_or_path);
  }
  std::vector<fs::path> roots;
  if (const char* env = std::getenv("FRENET_RACER_ASSETS")) {
    roots.emplace_back(env);
  }
  roots.emplace_back("assets");
#ifdef FRENET_RACER_DEFAULT_ASSETS
  roots.emplace_back(FRENET_RACER_DEFAULT_ASSETS);
#endif
  for (const fs::path& root : roots) {
    const fs::path candidate = root / "tracks" / (id_or_path + ".csv");
    if (exists(candidate)) return candidate.string();
  }
  std::string searched;
  for (const fs::path& root : roots) {
    searched += " " + (root / "tracks").string();
  }
  throw ParseError("track asset '" + id_or_path +
                   "' not found (searched:" + searched +
                   "); set FRENET_RACER_ASSETS");
}

}  // namespace frenet_racer
