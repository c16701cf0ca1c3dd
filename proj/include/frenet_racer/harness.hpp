#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "frenet_racer/checkpoint.hpp"
#include "frenet_racer/config.hpp"
#include "frenet_racer/env.hpp"

namespace frenet_racer {

struct EpisodeLog {
  int replica = 0;
  long episode = 0;
  long steps = 0;              // agent steps in this episode
  long agent_steps_total = 0;  // cumulative agent steps after this episode
  EpisodeStatus status = EpisodeStatus::Running;
  bool truncated = false;      // step budget ran out mid-episode
  double lap_time = 0.0;       // valid when status == LapComplete
  double episode_return = 0.0;
  double progress = 0.0;       // centerline metres covered
};

struct ReplicaResult {
  int replica = 0;
  std::string checkpoint_path;  // final checkpoint
  std::vector<EpisodeLog> episodes;
  // Fraction of completed (non-truncated) episodes that did not crash.
  double crash_free_fraction = 0.0;
};

struct TrainResult {
  std::vector<ReplicaResult> replicas;
};

// Run TD3 training per the config; writes per-replica training_log.jsonl and
// checkpoints under out_dir (replica_<r>/ subdirectories when replicas > 1).
// progress, when given, receives occasional human-readable status lines.
TrainResult train(const RunConfig& config, const std::string& out_dir,
                  std::ostream* progress = nullptr);

struct EpisodeEval {
  long episode = 0;
  EpisodeStatus status = EpisodeStatus::Running;
  bool success = false;
  double lap_time = 0.0;  // NaN unless success
  double crash_s = 0.0, crash_x = 0.0, crash_y = 0.0;  // NaN unless crashed
};

struct EvalReport {
  long laps = 0;
  double success_pct = 0.0;
  double mean_lap_time = 0.0;  // NaN when no lap succeeded
  double std_lap_time = 0.0;   // population std over successful laps
  MismatchSpec mismatch;
  std::vector<EpisodeEval> episodes;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  // Recompute the aggregate fields from the per-episode records.
  void recompute_aggregates();
};

// Evaluate a policy: `laps` episodes with deterministic actions and
// observation noise on.  When trajectory_dir is non-empty, writes one
// episode_<i>.csv trajectory log per episode.
EvalReport evaluate(const Td3Agent& agent, const RunConfig& config,
                    std::shared_ptr<const TrackGeometry> track,
                    const MismatchSpec& mismatch, int laps,
                    std::uint64_t seed,
                    const std::string& trajectory_dir = "");

struct SweepCell {
  double value = 0.0;     // mu / stiffness scale / mass [kg]
  double position = 0.0;  // mass sweep only (NaN otherwise)
  bool failed = false;
  std::string error;
  EvalReport report;
};

struct SweepResults {
  SweepKind kind = SweepKind::Friction;
  int laps_per_cell = 0;
  std::vector<SweepCell> cells;

  nlohmann::json to_json() const;
  static SweepResults from_json(const nlohmann::json& j);
};

// Mismatch for one sweep cell.
MismatchSpec cell_mismatch(SweepKind kind, double value, double position);

SweepResults run_sweep(const Td3Agent& agent, const RunConfig& config,
                       std::shared_ptr<const TrackGeometry> track,
                       const SweepSpec& spec, std::uint64_t seed,
                       std::ostream* progress = nullptr);

// --- export / import -------------------------------------------------------

// Lossless decimal formatting (round-trips through parsing).
std::string format_double(double v);

void write_sweep_csv(const SweepResults& results, const std::string& path);
void write_eval_csv(const EvalReport& report, const std::string& path);

struct SweepCsvRow {
  std::vector<double> key;  // mu / scale / (mass, position)
  double success_pct = 0.0;
  double mean_lap_time = 0.0;
  long laps = 0;
};
std::vector<SweepCsvRow> read_sweep_csv(const std::string& path);

struct EvalCsvRow {
  long episode = 0;
  std::string status;
  bool success = false;
  double lap_time = 0.0;
  double crash_s = 0.0, crash_x = 0.0, crash_y = 0.0;
};
std::vector<EvalCsvRow> read_eval_csv(const std::string& path);

// Write a results JSON (as produced by EvalReport/SweepResults::to_json) out
// as CSV and/or JSON files in out_dir.  Returns the written file paths.
std::vector<std::string> export_results(const nlohmann::json& results,
                                        const std::string& format,
                                        const std::string& out_dir);

}  // namespace frenet_racer
