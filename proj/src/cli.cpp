#include "frenet_racer/cli.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "frenet_racer/errors.hpp"
#include "frenet_racer/harness.hpp"

namespace frenet_racer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

// CLI-side mismatch override flags shared by eval.
struct MismatchArgs {
  std::optional<double> mu;
  std::optional<double> csf_scale;
  std::optional<double> csr_scale;
  std::optional<double> mass;
  std::optional<double> mass_position;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--mu", mu, "Override the road friction coefficient");
    cmd->add_option("--csf-scale", csf_scale,
                    "Scale the front cornering stiffness");
    cmd->add_option("--csr-scale", csr_scale,
                    "Scale the rear cornering stiffness");
    cmd->add_option("--mass", mass, "Added mass in kg");
    cmd->add_option("--mass-position", mass_position,
                    "Added-mass position in m forward of the rear axle");
  }

  MismatchSpec apply(MismatchSpec base, const VehicleParams& nominal) const {
    if (mu) base.mu_override = *mu;
    if (csf_scale) base.c_sf_scale = *csf_scale;
    if (csr_scale) base.c_sr_scale = *csr_scale;
    if (mass) {
      AddedMass am;
      am.mass = *mass;
      am.position = mass_position.value_or(nominal.l_r);
      base.added_mass = am;
    }
    return base;
  }
};

SweepSpec default_sweep(SweepKind kind, const VehicleParams& nominal,
                        int laps) {
  SweepSpec spec;
  spec.kind = kind;
  spec.laps_per_cell = laps;
  switch (kind) {
    case SweepKind::Friction:
      spec.values = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.0489};
      break;
    case SweepKind::StiffnessFront:
    case SweepKind::StiffnessRear:
    case SweepKind::StiffnessBoth:
      spec.values = {0.8, 0.9, 1.0, 1.1, 1.2};
      break;
    case SweepKind::Mass:
      spec.values = {0.3, 0.5, 1.0, 1.5};
      spec.positions = {0.0, nominal.wheelbase() / 2.0,
                        nominal.wheelbase()};
      break;
  }
  return spec;
}

int do_train(const CommonArgs& common, std::optional<int> replicas,
             std::optional<long> steps, const std::string& track,
             const std::string& algorithm) {
  if (common.config_path.empty()) {
    throw ValidationError("train requires --config");
  }
  RunConfig config = RunConfig::load_file(common.config_path);
  if (common.seed) config.seed = *common.seed;
  if (replicas) config.replicas = *replicas;
  if (steps) config.total_steps = *steps;
  if (!track.empty()) config.track = track;
  if (!algorithm.empty()) config.algorithm = algorithm_from_string(algorithm);
  std::string out = !common.out_dir.empty() ? common.out_dir
                    : !config.out_dir.empty()
                        ? config.out_dir
                        : "runs/" + to_string(config.algorithm) + "_" +
                              config.track;
  config.validate();

  const TrainResult result = train(config, out, &std::cout);
  for (const ReplicaResult& r : result.replicas) {
    std::cout << "replica " << r.replica << ": " << r.episodes.size()
              << " episodes, crash-free fraction "
              << r.crash_free_fraction << ", checkpoint "
              << r.checkpoint_path << '\n';
  }
  return 0;
}

int do_eval(const CommonArgs& common, const std::string& checkpoint_path,
            const std::string& track, std::optional<int> laps,
            const MismatchArgs& mismatch_args, bool trajectories) {
  LoadedCheckpoint ck = load_checkpoint(checkpoint_path);
  RunConfig config = common.config_path.empty()
                         ? ck.config
                         : RunConfig::load_file(common.config_path);
  if (!track.empty()) config.track = track;
  if (laps) config.evaluation.laps = *laps;
  const std::uint64_t seed = common.seed.value_or(config.seed);
  const std::string out = common.out_dir.empty() ? "eval_out"
                                                 : common.out_dir;

  const MismatchSpec mismatch =
      mismatch_args.apply(config.mismatch, config.vehicle);
  mismatch.validate(config.vehicle.wheelbase());

  const auto track_geom = std::make_shared<const TrackGeometry>(
      TrackGeometry::from_file(resolve_track_path(config.track)));
  const std::string traj_dir =
      trajectories ? (fs::path(out) / "trajectories").string() : "";
  const EvalReport report =
      evaluate(*ck.agent, config, track_geom, mismatch,
               config.evaluation.laps, seed, traj_dir);

  fs::create_directories(out);
  std::ofstream(fs::path(out) / "eval.json")
      << report.to_json().dump(2) << '\n';
  write_eval_csv(report, (fs::path(out) / "eval.csv").string());
  std::cout << "success " << report.success_pct << "% over " << report.laps
            << " laps";
  if (!std::isnan(report.mean_lap_time)) {
    std::cout << ", mean lap " << report.mean_lap_time << " s";
  }
  std::cout << "; wrote " << (fs::path(out) / "eval.json").string() << '\n';
  return 0;
}

int do_sweep(const CommonArgs& common, const std::string& checkpoint_path,
             const std::string& kind_name, std::optional<int> laps,
             const std::string& track) {
  LoadedCheckpoint ck = load_checkpoint(checkpoint_path);
  RunConfig config = common.config_path.empty()
                         ? ck.config
                         : RunConfig::load_file(common.config_path);
  if (!track.empty()) config.track = track;
  const std::uint64_t seed = common.seed.value_or(config.seed);
  const std::string out = common.out_dir.empty() ? "sweep_out"
                                                 : common.out_dir;

  SweepSpec spec;
  if (!kind_name.empty()) {
    spec = default_sweep(sweep_kind_from_string(kind_name), config.vehicle,
                         laps.value_or(config.evaluation.laps));
  } else if (config.sweep.has_value()) {
    spec = *config.sweep;
    if (laps) spec.laps_per_cell = *laps;
  } else {
    spec = default_sweep(SweepKind::Friction, config.vehicle,
                         laps.value_or(config.evaluation.laps));
  }
  spec.validate(config.vehicle);

  const auto track_geom = std::make_shared<const TrackGeometry>(
      TrackGeometry::from_file(resolve_track_path(config.track)));
  const SweepResults results =
      run_sweep(*ck.agent, config, track_geom, spec, seed, &std::cout);

  fs::create_directories(out);
  std::ofstream(fs::path(out) / "sweep.json")
      << results.to_json().dump(2) << '\n';
  write_sweep_csv(results, (fs::path(out) / "sweep.csv").string());
  std::cout << "wrote " << (fs::path(out) / "sweep.csv").string() << '\n';
  return 0;
}

int do_export(const CommonArgs& common, const std::string& results_path,
              const std::string& format) {
  std::ifstream in(results_path);
  if (!in) throw ParseError("cannot open results file: " + results_path);
  json results;
  try {
    in >> results;
  } catch (const json::exception& e) {
    throw ParseError("results " + results_path + ": " + e.what());
  }
  const std::string out = common.out_dir.empty() ? "." : common.out_dir;
  for (const std::string& path : export_results(results, format, out)) {
    std::cout << "wrote " << path << '\n';
  }
  return 0;
}

int do_validate(const CommonArgs& common) {
  if (common.config_path.empty()) {
    throw ValidationError("validate-config requires --config");
  }
  RunConfig config = RunConfig::load_file(common.config_path);
  config.validate();
  // Touch the track asset too so a bad track id fails here, not mid-run.
  resolve_track_path(config.track);
  std::cout << common.config_path << ": OK\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"frenet_racer: racing-line RL training, evaluation, and "
               "model-mismatch sweeps"};
  app.require_subcommand(1);

  CommonArgs common;
  const auto add_common = [&](CLI::App* cmd, bool with_out = true) {
    cmd->add_option("--config", common.config_path,
                    "Path to a JSON run configuration");
    cmd->add_option("--seed", common.seed, "Override the run seed");
    if (with_out) {
      cmd->add_option("--out", common.out_dir, "Output directory");
    }
  };

  // train
  auto* train_cmd =
      app.add_subcommand("train", "Train an agent per the configuration");
  add_common(train_cmd);
  std::optional<int> replicas;
  std::optional<long> steps;
  std::string track_override, algorithm_override;
  train_cmd->add_option("--replicas", replicas,
                        "Override the number of training replicas");
  train_cmd->add_option("--steps", steps, "Override total agent steps");
  train_cmd->add_option("--track", track_override, "Override the track id");
  train_cmd->add_option("--algorithm", algorithm_override,
                        "Override the algorithm (end_to_end | partial)");

  // eval
  auto* eval_cmd = app.add_subcommand(
      "eval", "Evaluate a checkpoint over repeated laps");
  add_common(eval_cmd);
  std::string checkpoint_path;
  std::optional<int> laps;
  bool trajectories = false;
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")
      ->required();
  eval_cmd->add_option("--track", track_override, "Override the track id");
  eval_cmd->add_option("--laps", laps, "Number of evaluation episodes");
  eval_cmd->add_flag("--trajectories", trajectories,
                     "Write per-episode trajectory CSV files");
  MismatchArgs mismatch_args;
  mismatch_args.add_flags(eval_cmd);

  // sweep
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Evaluate a checkpoint across a model-mismatch grid");
  add_common(sweep_cmd);
  std::string sweep_kind;
  sweep_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")
      ->required();
  sweep_cmd->add_option(
      "--kind", sweep_kind,
      "Sweep kind: friction | stiffness_front | stiffness_rear | "
      "stiffness_both | mass (default: config's sweep section, else "
      "friction)");
  sweep_cmd->add_option("--laps", laps, "Laps per sweep cell");
  sweep_cmd->add_option("--track", track_override, "Override the track id");

  // export
  auto* export_cmd = app.add_subcommand(
      "export", "Convert a results JSON file to CSV or JSON tables");
  add_common(export_cmd);
  std::string results_path, format = "csv";
  export_cmd->add_option("--results", results_path, "Results JSON file")
      ->required();
  export_cmd->add_option("--format", format, "Output format: csv | json");

  // validate-config
  auto* validate_cmd = app.add_subcommand(
      "validate-config", "Parse and validate a configuration file");
  add_common(validate_cmd, /*with_out=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n"
              << "run 'racer --help' for usage\n";
    return 2;
  }

  try {
    if (train_cmd->parsed()) {
      return do_train(common, replicas, steps, track_override,
                      algorithm_override);
    }
    if (eval_cmd->parsed()) {
      return do_eval(common, checkpoint_path, track_override, laps,
                     mismatch_args, trajectories);
    }
    if (sweep_cmd->parsed()) {
      return do_sweep(common, checkpoint_path, sweep_kind, laps,
                      track_override);
    }
    if (export_cmd->parsed()) {
      return do_export(common, results_path, format);
    }
    if (validate_cmd->parsed()) {
      return do_validate(common);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace frenet_racer
