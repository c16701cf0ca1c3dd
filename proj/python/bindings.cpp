#include <pybind11/eigen.h>
#include <pybind11/iostream.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "frenet_racer/checkpoint.hpp"
#include "frenet_racer/config.hpp"
#include "frenet_racer/control.hpp"
#include "frenet_racer/env.hpp"
#include "frenet_racer/errors.hpp"
#include "frenet_racer/harness.hpp"
#include "frenet_racer/planning.hpp"
#include "frenet_racer/rng.hpp"
#include "frenet_racer/td3.hpp"
#include "frenet_racer/track.hpp"
#include "frenet_racer/vehicle.hpp"

namespace py = pybind11;
using namespace frenet_racer;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null:
      return py::none();
    case json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case json::value_t::number_integer:
      return py::int_(j.get<long long>());
    case json::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case json::value_t::number_float:
      return py::float_(j.get<double>());
    case json::value_t::string:
      return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out[py::str(it.key())] = json_to_py(it.value());
      }
      return out;
    }
    default:
      return py::none();
  }
}

py::dict info_to_dict(const StepInfo& info) {
  py::dict d;
  d["sim_time"] = info.sim_time;
  d["x"] = info.x;
  d["y"] = info.y;
  d["psi"] = info.psi;
  d["v"] = info.v;
  d["s"] = info.s;
  d["n"] = info.n;
  d["action"] = py::make_tuple(info.action[0], info.action[1]);
  d["reward"] = info.reward;
  d["status"] = to_string(info.status);
  d["progress_total"] = info.progress_total;
  d["lap_time"] = info.lap_time;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Racing-line RL core: track geometry, single-track vehicle "
            "dynamics, planner/controller stack, TD3, and the run harness.";

  // Base first so the more specific translators (registered later) win.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<OutOfCorridorError>(m, "OutOfCorridorError",
                                             PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError",
                                          PyExc_ValueError);

  py::enum_<Algorithm>(m, "Algorithm")
      .value("END_TO_END", Algorithm::EndToEnd)
      .value("PARTIAL", Algorithm::Partial);

  py::enum_<EpisodeStatus>(m, "EpisodeStatus")
      .value("RUNNING", EpisodeStatus::Running)
      .value("CRASHED", EpisodeStatus::Crashed)
      .value("LAP_COMPLETE", EpisodeStatus::LapComplete)
      .value("TIMEOUT", EpisodeStatus::Timeout);

  py::enum_<SweepKind>(m, "SweepKind")
      .value("FRICTION", SweepKind::Friction)
      .value("STIFFNESS_FRONT", SweepKind::StiffnessFront)
      .value("STIFFNESS_REAR", SweepKind::StiffnessRear)
      .value("STIFFNESS_BOTH", SweepKind::StiffnessBoth)
      .value("MASS", SweepKind::Mass);

  // --- randomness -----------------------------------------------------------
  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", static_cast<double (Rng::*)()>(&Rng::uniform))
      .def("uniform",
           static_cast<double (Rng::*)(double, double)>(&Rng::uniform),
           py::arg("lo"), py::arg("hi"))
      .def("normal", static_cast<double (Rng::*)()>(&Rng::normal))
      .def("normal",
           static_cast<double (Rng::*)(double, double)>(&Rng::normal),
           py::arg("mean"), py::arg("std"))
      .def("uniform_index", &Rng::uniform_index, py::arg("n"));

  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("tag"),
        py::arg("index"),
        "Deterministic child seed for a named stream of a base seed.");

  // --- vehicle --------------------------------------------------------------
  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("m", &VehicleParams::m)
      .def_readwrite("I_z", &VehicleParams::I_z)
      .def_readwrite("l_f", &VehicleParams::l_f)
      .def_readwrite("l_r", &VehicleParams::l_r)
      .def_readwrite("h_cg", &VehicleParams::h_cg)
      .def_readwrite("C_Sf", &VehicleParams::C_Sf)
      .def_readwrite("C_Sr", &VehicleParams::C_Sr)
      .def_readwrite("mu", &VehicleParams::mu)
      .def("wheelbase", &VehicleParams::wheelbase)
      .def("validate", &VehicleParams::validate);

  py::class_<VehicleConstraints>(m, "VehicleConstraints")
      .def(py::init<>())
      .def_readwrite("delta_min", &VehicleConstraints::delta_min)
      .def_readwrite("delta_max", &VehicleConstraints::delta_max)
      .def_readwrite("ddelta_min", &VehicleConstraints::ddelta_min)
      .def_readwrite("ddelta_max", &VehicleConstraints::ddelta_max)
      .def_readwrite("v_min_model", &VehicleConstraints::v_min_model)
      .def_readwrite("v_max_model", &VehicleConstraints::v_max_model)
      .def_readwrite("a_max", &VehicleConstraints::a_max)
      .def_readwrite("v_switch", &VehicleConstraints::v_switch)
      .def_readwrite("v_max_allow", &VehicleConstraints::v_max_allow)
      .def_readwrite("v_min_allow", &VehicleConstraints::v_min_allow)
      .def("validate", &VehicleConstraints::validate);

  py::class_<VehicleState>(m, "VehicleState")
      .def(py::init<>())
      .def_readwrite("x", &VehicleState::x)
      .def_readwrite("y", &VehicleState::y)
      .def_readwrite("delta", &VehicleState::delta)
      .def_readwrite("v", &VehicleState::v)
      .def_readwrite("psi", &VehicleState::psi)
      .def_readwrite("psi_dot", &VehicleState::psi_dot)
      .def_readwrite("beta", &VehicleState::beta)
      .def("__repr__", [](const VehicleState& s) {
        std::ostringstream os;
        os << "VehicleState(x=" << s.x << ", y=" << s.y << ", delta="
           << s.delta << ", v=" << s.v << ", psi=" << s.psi << ", psi_dot="
           << s.psi_dot << ", beta=" << s.beta << ")";
        return os.str();
      });

  py::class_<InputCommand>(m, "InputCommand")
      .def(py::init<>())
      .def(py::init([](double a_long_d, double delta_d) {
             InputCommand c;
             c.a_long_d = a_long_d;
             c.delta_d = delta_d;
             return c;
           }),
           py::arg("a_long_d"), py::arg("delta_d"))
      .def_readwrite("a_long_d", &InputCommand::a_long_d)
      .def_readwrite("delta_d", &InputCommand::delta_d);

  py::class_<EffectiveInput>(m, "EffectiveInput")
      .def_readonly("a", &EffectiveInput::a)
      .def_readonly("delta_rate", &EffectiveInput::delta_rate);

  py::class_<AddedMass>(m, "AddedMass")
      .def(py::init<>())
      .def(py::init([](double mass, double position) {
             AddedMass a;
             a.mass = mass;
             a.position = position;
             return a;
           }),
           py::arg("mass"), py::arg("position"))
      .def_readwrite("mass", &AddedMass::mass)
      .def_readwrite("position", &AddedMass::position);

  py::class_<MismatchSpec>(m, "MismatchSpec")
      .def(py::init<>())
      .def_readwrite("mu_override", &MismatchSpec::mu_override)
      .def_readwrite("c_sf_scale", &MismatchSpec::c_sf_scale)
      .def_readwrite("c_sr_scale", &MismatchSpec::c_sr_scale)
      .def_readwrite("added_mass", &MismatchSpec::added_mass)
      .def("is_identity", &MismatchSpec::is_identity);

  m.def("constrain_inputs", &constrain_inputs, py::arg("state"),
        py::arg("command"), py::arg("constraints"), py::arg("dt"),
        "Clamp a raw (acceleration, steering-angle) command to the "
        "actuator limits; returns the effective (a, delta_rate) pair.");
  m.def("step_vehicle", &step_vehicle, py::arg("state"), py::arg("command"),
        py::arg("params"), py::arg("constraints"), py::arg("dt"),
        "One RK4 integration step of the single-track model.");
  m.def("apply_mismatch", &apply_mismatch, py::arg("nominal"),
        py::arg("mismatch"),
        "Effective vehicle parameters after friction / stiffness / "
        "added-mass perturbations.");

  // --- track ----------------------------------------------------------------
  py::class_<LidarConfig>(m, "LidarConfig")
      .def(py::init<>())
      .def_readwrite("n_beams", &LidarConfig::n_beams)
      .def_readwrite("fov", &LidarConfig::fov)
      .def_readwrite("max_range", &LidarConfig::max_range)
      .def_readwrite("noise_std", &LidarConfig::noise_std);

  py::class_<FrenetPose>(m, "FrenetPose")
      .def(py::init<>())
      .def_readwrite("s", &FrenetPose::s)
      .def_readwrite("n", &FrenetPose::n)
      .def_readwrite("psi", &FrenetPose::psi)
      .def("__repr__", [](const FrenetPose& p) {
        std::ostringstream os;
        os << "FrenetPose(s=" << p.s << ", n=" << p.n << ", psi=" << p.psi
           << ")";
        return os.str();
      });

  py::class_<CartesianPoint>(m, "CartesianPoint")
      .def_readonly("x", &CartesianPoint::x)
      .def_readonly("y", &CartesianPoint::y)
      .def_readonly("tangent_heading", &CartesianPoint::tangent_heading);

  py::class_<TrackGeometry, std::shared_ptr<TrackGeometry>>(m,
                                                            "TrackGeometry")
      .def_static(
          "load",
          [](const std::string& id_or_path) {
            return std::make_shared<TrackGeometry>(
                TrackGeometry::from_file(resolve_track_path(id_or_path)));
          },
          py::arg("id_or_path"),
          "Load a track by id (resolved against the asset roots) or by "
          "explicit CSV path.")
      .def_static(
          "from_csv",
          [](const std::string& text, const std::string& name) {
            return std::make_shared<TrackGeometry>(
                TrackGeometry::from_csv(text, name));
          },
          py::arg("text"), py::arg("name") = "<csv>")
      .def_property_readonly("name", &TrackGeometry::name)
      .def_property_readonly("closed", &TrackGeometry::closed)
      .def_property_readonly("length", &TrackGeometry::total_length)
      .def_property_readonly("point_count", &TrackGeometry::point_count)
      .def("to_frenet", &TrackGeometry::to_frenet, py::arg("x"), py::arg("y"),
           py::arg("heading"))
      .def("to_cartesian", &TrackGeometry::to_cartesian, py::arg("s"),
           py::arg("n"))
      .def(
          "lidar_scan",
          [](const TrackGeometry& t, double x, double y, double heading,
             const LidarConfig& cfg, std::uint64_t seed) {
            Rng rng(seed);
            return t.lidar_scan(x, y, heading, cfg, rng);
          },
          py::arg("x"), py::arg("y"), py::arg("heading"),
          py::arg("config") = LidarConfig{}, py::arg("seed") = 0)
      .def("check_collision", &TrackGeometry::check_collision,
           py::arg("pose"), py::arg("vehicle_half_width"))
      .def("progress", &TrackGeometry::progress, py::arg("s_prev"),
           py::arg("s_now"));

  m.def("resolve_track_path", &resolve_track_path, py::arg("id_or_path"));

  // --- planner / controller -------------------------------------------------
  py::class_<PlannerConfig>(m, "PlannerConfig")
      .def(py::init<>())
      .def_readwrite("margin", &PlannerConfig::margin)
      .def_readwrite("samples", &PlannerConfig::samples);

  py::class_<ControllerConfig>(m, "ControllerConfig")
      .def(py::init<>())
      .def_readwrite("k_v", &ControllerConfig::k_v)
      .def_readwrite("lookahead", &ControllerConfig::lookahead);

  py::class_<PlannedTrajectory>(m, "PlannedTrajectory")
      .def_property_readonly("points",
                             [](const PlannedTrajectory& t) {
                               py::list out;
                               for (const Vec2& p : t.points) {
                                 out.append(py::make_tuple(p.x, p.y));
                               }
                               return out;
                             })
      .def_readonly("v_d", &PlannedTrajectory::v_d);

  m.def("plan", &plan, py::arg("frenet"), py::arg("lateral_action"),
        py::arg("velocity_action"), py::arg("track"), py::arg("constraints"),
        py::arg("config"),
        "Cubic lateral replanning over the 2 m horizon; returns the sampled "
        "Cartesian path and the desired speed.");
  m.def("pure_pursuit_steer", &pure_pursuit_steer, py::arg("path"),
        py::arg("x"), py::arg("y"), py::arg("heading"), py::arg("wheelbase"),
        py::arg("lookahead"), py::arg("constraints"));
  m.def("velocity_command", &velocity_command, py::arg("v_d"), py::arg("v"),
        py::arg("k_v"), py::arg("constraints"));
  m.def("velocity_constraint", &velocity_constraint, py::arg("a_long_d"),
        py::arg("v"), py::arg("constraints"));

  // --- TD3 ------------------------------------------------------------------
  py::class_<Td3Config>(m, "Td3Config")
      .def(py::init<>())
      .def_readwrite("gamma", &Td3Config::gamma)
      .def_readwrite("tau", &Td3Config::tau)
      .def_readwrite("exploration_noise_std", &Td3Config::exploration_noise_std)
      .def_readwrite("target_noise_std", &Td3Config::target_noise_std)
      .def_readwrite("target_noise_clip", &Td3Config::target_noise_clip)
      .def_readwrite("policy_delay", &Td3Config::policy_delay)
      .def_readwrite("batch_size", &Td3Config::batch_size)
      .def_readwrite("learning_rate", &Td3Config::learning_rate)
      .def_readwrite("buffer_capacity", &Td3Config::buffer_capacity)
      .def_readwrite("warmup_steps", &Td3Config::warmup_steps)
      .def_readwrite("hidden1", &Td3Config::hidden1)
      .def_readwrite("hidden2", &Td3Config::hidden2)
      .def("validate", &Td3Config::validate);

  py::class_<Td3Losses>(m, "Td3Losses")
      .def_readonly("critic1", &Td3Losses::critic1)
      .def_readonly("critic2", &Td3Losses::critic2)
      .def_readonly("actor", &Td3Losses::actor);

  py::class_<ReplayBuffer>(m, "ReplayBuffer")
      .def(py::init<std::size_t>(), py::arg("capacity"))
      .def(
          "add",
          [](ReplayBuffer& b, Eigen::VectorXd obs, Eigen::VectorXd action,
             double reward, Eigen::VectorXd next_obs, bool done) {
            Transition t;
            t.obs = std::move(obs);
            t.action = std::move(action);
            t.reward = reward;
            t.next_obs = std::move(next_obs);
            t.done = done;
            b.add(std::move(t));
          },
          py::arg("obs"), py::arg("action"), py::arg("reward"),
          py::arg("next_obs"), py::arg("done"))
      .def("__len__", &ReplayBuffer::size)
      .def_property_readonly("capacity", &ReplayBuffer::capacity);

  py::class_<Td3Agent>(m, "Td3Agent")
      .def(py::init<int, int, const Td3Config&, std::uint64_t>(),
           py::arg("obs_dim"), py::arg("action_dim"),
           py::arg("config") = Td3Config{}, py::arg("init_seed") = 0)
      .def_property_readonly("obs_dim", &Td3Agent::obs_dim)
      .def_property_readonly("action_dim", &Td3Agent::action_dim)
      .def_property_readonly("update_count", &Td3Agent::update_count)
      .def("act", &Td3Agent::act, py::arg("obs"),
           "Deterministic policy action in [-1, 1]^action_dim.")
      .def(
          "select_action",
          [](const Td3Agent& agent, const Eigen::VectorXd& obs,
             double noise_std, Rng& rng) {
            return select_action(agent.actor(), obs, noise_std, rng);
          },
          py::arg("obs"), py::arg("noise_std"), py::arg("rng"),
          "Policy action with exploration noise, clamped to [-1, 1].")
      .def("update", &Td3Agent::update, py::arg("buffer"), py::arg("rng"),
           "One learner call; returns the losses, or None while the buffer "
           "is smaller than one batch.");

  m.def("compute_reward", &compute_reward, py::arg("progress_delta"),
        py::arg("collided"), py::arg("constants"));

  py::class_<RewardConstants>(m, "RewardConstants")
      .def(py::init<>())
      .def_readwrite("r_collision", &RewardConstants::r_collision)
      .def_readwrite("r_dist", &RewardConstants::r_dist)
      .def_readwrite("r_time", &RewardConstants::r_time);

  // --- environment ----------------------------------------------------------
  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("agent_period", &SimConfig::agent_period)
      .def_readwrite("timeout", &SimConfig::timeout);

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("vehicle", &EnvConfig::vehicle)
      .def_readwrite("constraints", &EnvConfig::constraints)
      .def_readwrite("lidar", &EnvConfig::lidar)
      .def_readwrite("sim", &EnvConfig::sim)
      .def_readwrite("planner", &EnvConfig::planner)
      .def_readwrite("controller", &EnvConfig::controller)
      .def_readwrite("reward", &EnvConfig::reward)
      .def_readwrite("vehicle_half_width", &EnvConfig::vehicle_half_width)
      .def_readwrite("observation_noise_std",
                     &EnvConfig::observation_noise_std);

  py::class_<RaceEnv>(m, "RaceEnv")
      .def(py::init<std::shared_ptr<const TrackGeometry>, Algorithm,
                    const EnvConfig&>(),
           py::arg("track"), py::arg("algorithm"),
           py::arg("config") = EnvConfig{})
      .def_property_readonly("observation_dim", &RaceEnv::observation_dim)
      .def_property_readonly("algorithm", &RaceEnv::algorithm)
      .def_property_readonly("status", &RaceEnv::status)
      .def_property_readonly("vehicle_state", &RaceEnv::vehicle_state)
      .def_property_readonly("frenet_pose", &RaceEnv::frenet_pose)
      .def("reset", &RaceEnv::reset, py::arg("episode_seed"),
           py::arg("mismatch") = MismatchSpec{},
           "Start a new episode; returns the initial observation.")
      .def(
          "step",
          [](RaceEnv& env, const std::array<double, 2>& action) {
            StepResult r = env.step(action);
            return py::make_tuple(r.observation, r.reward, r.done,
                                  info_to_dict(r.info));
          },
          py::arg("action"),
          "One agent step; returns (observation, reward, done, info).");

  // --- config / checkpoint / harness ---------------------------------------
  py::class_<EvalSpec>(m, "EvalSpec")
      .def(py::init<>())
      .def_readwrite("laps", &EvalSpec::laps)
      .def_readwrite("observation_noise_std", &EvalSpec::observation_noise_std);

  py::class_<SweepSpec>(m, "SweepSpec")
      .def(py::init<>())
      .def_readwrite("kind", &SweepSpec::kind)
      .def_readwrite("values", &SweepSpec::values)
      .def_readwrite("positions", &SweepSpec::positions)
      .def_readwrite("laps_per_cell", &SweepSpec::laps_per_cell);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("algorithm", &RunConfig::algorithm)
      .def_readwrite("track", &RunConfig::track)
      .def_readwrite("total_steps", &RunConfig::total_steps)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("replicas", &RunConfig::replicas)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_readwrite("checkpoint_every", &RunConfig::checkpoint_every)
      .def_readwrite("log_trajectories", &RunConfig::log_trajectories)
      .def_readwrite("td3", &RunConfig::td3)
      .def_readwrite("controller", &RunConfig::controller)
      .def_readwrite("planner", &RunConfig::planner)
      .def_readwrite("reward", &RunConfig::reward)
      .def_readwrite("evaluation", &RunConfig::evaluation)
      .def_readwrite("vehicle", &RunConfig::vehicle)
      .def_readwrite("constraints", &RunConfig::constraints)
      .def_readwrite("vehicle_half_width", &RunConfig::vehicle_half_width)
      .def_readwrite("lidar", &RunConfig::lidar)
      .def_readwrite("sim", &RunConfig::sim)
      .def_readwrite("mismatch", &RunConfig::mismatch)
      .def_readwrite("sweep", &RunConfig::sweep)
      .def_static("load", &RunConfig::load_file, py::arg("path"))
      .def_static(
          "from_json",
          [](const std::string& text) {
            json j;
            try {
              j = json::parse(text);
            } catch (const json::exception& e) {
              throw ParseError(std::string("config JSON: ") + e.what());
            }
            return RunConfig::from_json(j);
          },
          py::arg("text"))
      .def("to_json",
           [](const RunConfig& c) { return c.to_json().dump(2); })
      .def("validate", &RunConfig::validate)
      .def("env_config", &RunConfig::env_config, py::arg("evaluation_mode"));

  m.def("save_checkpoint", &save_checkpoint, py::arg("path"),
        py::arg("agent"), py::arg("config"), py::arg("train_step"));
  m.def(
      "load_checkpoint",
      [](const std::string& path) {
        LoadedCheckpoint ck = load_checkpoint(path);
        return py::make_tuple(ck.config, ck.train_step,
                              py::cast(std::move(ck.agent)));
      },
      py::arg("path"),
      "Load a checkpoint; returns (config, train_step, agent).");

  m.def(
      "train",
      [](const RunConfig& config, const std::string& out_dir, bool verbose) {
        TrainResult result;
        {
          py::gil_scoped_release release;
          result = train(config, out_dir, verbose ? &std::cout : nullptr);
        }
        py::list replicas;
        for (const ReplicaResult& r : result.replicas) {
          py::dict d;
          d["replica"] = r.replica;
          d["checkpoint_path"] = r.checkpoint_path;
          d["episodes"] = static_cast<long>(r.episodes.size());
          d["crash_free_fraction"] = r.crash_free_fraction;
          replicas.append(d);
        }
        return replicas;
      },
      py::arg("config"), py::arg("out_dir"), py::arg("verbose") = false,
      "Run TD3 training; returns one summary dict per replica.");

  m.def(
      "evaluate",
      [](const Td3Agent& agent, const RunConfig& config,
         std::shared_ptr<const TrackGeometry> track,
         const MismatchSpec& mismatch, int laps, std::uint64_t seed,
         const std::string& trajectory_dir) {
        EvalReport report;
        {
          py::gil_scoped_release release;
          report = evaluate(agent, config, std::move(track), mismatch, laps,
                            seed, trajectory_dir);
        }
        return json_to_py(report.to_json());
      },
      py::arg("agent"), py::arg("config"), py::arg("track"),
      py::arg("mismatch") = MismatchSpec{}, py::arg("laps") = 100,
      py::arg("seed") = 0, py::arg("trajectory_dir") = "",
      "Evaluate a policy over repeated laps; returns the report as a dict.");

  m.def(
      "run_sweep",
      [](const Td3Agent& agent, const RunConfig& config,
         std::shared_ptr<const TrackGeometry> track, const SweepSpec& spec,
         std::uint64_t seed, bool verbose) {
        SweepResults results;
        {
          py::gil_scoped_release release;
          results = run_sweep(agent, config, std::move(track), spec, seed,
                              verbose ? &std::cout : nullptr);
        }
        return json_to_py(results.to_json());
      },
      py::arg("agent"), py::arg("config"), py::arg("track"), py::arg("spec"),
      py::arg("seed") = 0, py::arg("verbose") = false,
      "Evaluate across a model-mismatch grid; returns the results as a "
      "dict.");

  m.def(
      "export_results",
      [](const std::string& results_json, const std::string& format,
         const std::string& out_dir) {
        json j;
        try {
          j = json::parse(results_json);
        } catch (const json::exception& e) {
          throw ParseError(std::string("results JSON: ") + e.what());
        }
        return export_results(j, format, out_dir);
      },
      py::arg("results_json"), py::arg("format"), py::arg("out_dir"),
      "Write a results JSON document out as CSV or JSON tables; returns "
      "the written paths.");
}
