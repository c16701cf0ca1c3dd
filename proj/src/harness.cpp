#include "frenet_racer/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "frenet_racer/errors.hpp"

namespace frenet_racer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double number_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kNan;
  return j.at(key).get<double>();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create output directory '" + dir +
                "': " + ec.message());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  return out;
}

void write_trajectory_header(std::ofstream& out) {
  out << "t,x,y,psi,v,s,n,action0,action1,reward\n";
}

void write_trajectory_row(std::ofstream& out, const StepInfo& info) {
  out << format_double(info.sim_time) << ',' << format_double(info.x) << ','
      << format_double(info.y) << ',' << format_double(info.psi) << ','
      << format_double(info.v) << ',' << format_double(info.s) << ','
      << format_double(info.n) << ',' << format_double(info.action[0]) << ','
      << format_double(info.action[1]) << ',' << format_double(info.reward)
      << '\n';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TrainResult train(const RunConfig& config, const std::string& out_dir,
                  std::ostream* progress) {
  config.validate();
  const auto track = std::make_shared<const TrackGeometry>(
      TrackGeometry::from_file(resolve_track_path(config.track)));

  TrainResult result;
  for (int r = 0; r < config.replicas; ++r) {
    const fs::path dir = config.replicas > 1
                             ? fs::path(out_dir) / ("replica_" +
                                                    std::to_string(r))
                             : fs::path(out_dir);
    ensure_dir(dir.string());
    std::ofstream log = open_out((dir / "training_log.jsonl").string());
    log << json{{"event", "run_config"},
                {"replica", r},
                {"config", config.to_json()}}
               .dump()
        << '\n';

    const std::uint64_t rseed = derive_seed(config.seed, "replica", r);
    Td3Agent agent(4 + config.lidar.n_beams, 2, config.td3,
                   derive_seed(rseed, "init"));
    ReplayBuffer buffer(config.td3.buffer_capacity);
    Rng action_rng(derive_seed(rseed, "action"));
    Rng update_rng(derive_seed(rseed, "update"));
    RaceEnv env(track, config.algorithm, config.env_config(false));

    ReplicaResult rep;
    rep.replica = r;
    long total = 0;
    long episode = 0;
    long crashes = 0;
    long completed = 0;

    while (total < config.total_steps) {
      std::vector<double> obs =
          env.reset(derive_seed(rseed, "episode", episode));
      EpisodeLog el;
      el.replica = r;
      el.episode = episode;

      while (env.status() == EpisodeStatus::Running) {
        Eigen::VectorXd obs_vec = to_vector(obs);
        std::array<double, 2> action;
        if (total < config.td3.warmup_steps) {
          action = {action_rng.uniform(-1.0, 1.0),
                    action_rng.uniform(-1.0, 1.0)};
        } else {
          const Eigen::VectorXd a =
              select_action(agent.actor(), obs_vec,
                            config.td3.exploration_noise_std, action_rng);
          action = {a(0), a(1)};
        }
        const StepResult sr = env.step(action);
        ++total;
        ++el.steps;
        el.episode_return += sr.reward;

        Transition t;
        t.obs = std::move(obs_vec);
        t.action = Eigen::Vector2d(action[0], action[1]);
        t.reward = sr.reward;
        t.next_obs = to_vector(sr.observation);
        // Timeouts are truncations, not terminal states: the value function
        // still bootstraps there.
        t.done = sr.info.status == EpisodeStatus::Crashed ||
                 sr.info.status == EpisodeStatus::LapComplete;
        buffer.add(std::move(t));
        obs = sr.observation;

        if (total >= config.td3.warmup_steps) {
          agent.update(buffer, update_rng);
        }
        if (total % config.checkpoint_every == 0) {
          save_checkpoint((dir / "checkpoint_latest.bin").string(), agent,
                          config, total);
        }
        if (total >= config.total_steps) break;
      }

      el.status = env.status();
      el.truncated = env.status() == EpisodeStatus::Running;
      el.agent_steps_total = total;
      el.progress = env.total_progress();
      el.lap_time = env.status() == EpisodeStatus::LapComplete
                        ? env.sim_time()
                        : kNan;
      if (!el.truncated) {
        ++completed;
        if (el.status == EpisodeStatus::Crashed) ++crashes;
      }

      log << json{{"event", "episode"},
                  {"replica", r},
                  {"episode", el.episode},
                  {"steps", el.steps},
                  {"agent_steps_total", el.agent_steps_total},
                  {"status", el.truncated ? "truncated"
                                          : to_string(el.status)},
                  {"lap_time_s", number_or_null(el.lap_time)},
                  {"return", el.episode_return},
                  {"progress_m", el.progress}}
                 .dump()
          << '\n';
      rep.episodes.push_back(el);
      ++episode;

      if (progress && episode % 50 == 0) {
        (*progress) << "replica " << r << ": " << total << "/"
                    << config.total_steps << " steps, " << episode
                    << " episodes\n";
        progress->flush();
      }
    }

    rep.crash_free_fraction =
        completed > 0
            ? static_cast<double>(completed - crashes) / completed
            : 0.0;
    rep.checkpoint_path = (dir / "checkpoint_final.bin").string();
    save_checkpoint(rep.checkpoint_path, agent, config, total);
    log << json{{"event", "train_end"},
                {"replica", r},
                {"agent_steps", total},
                {"episodes", episode},
                {"crash_free_fraction", rep.crash_free_fraction}}
               .dump()
        << '\n';
    result.replicas.push_back(std::move(rep));
  }
  return result;
}

void EvalReport::recompute_aggregates() {
  laps = static_cast<long>(episodes.size());
  long successes = 0;
  double sum = 0.0;
  for (const EpisodeEval& e : episodes) {
    if (e.success) {
      ++successes;
      sum += e.lap_time;
    }
  }
  success_pct = laps > 0 ? 100.0 * successes / laps : 0.0;
  if (successes > 0) {
    mean_lap_time = sum / successes;
    double var = 0.0;
    for (const EpisodeEval& e : episodes) {
      if (e.success) {
        var += (e.lap_time - mean_lap_time) * (e.lap_time - mean_lap_time);
      }
    }
    std_lap_time = std::sqrt(var / successes);
  } else {
    mean_lap_time = kNan;
    std_lap_time = kNan;
  }
}

json EvalReport::to_json() const {
  json eps = json::array();
  for (const EpisodeEval& e : episodes) {
    eps.push_back({{"episode", e.episode},
                   {"status", to_string(e.status)},
                   {"success", e.success},
                   {"lap_time_s", number_or_null(e.lap_time)},
                   {"crash_s", number_or_null(e.crash_s)},
                   {"crash_x", number_or_null(e.crash_x)},
                   {"crash_y", number_or_null(e.crash_y)}});
  }
  return {{"type", "eval"},
          {"laps", laps},
          {"success_pct", success_pct},
          {"mean_lap_time_s", number_or_null(mean_lap_time)},
          {"std_lap_time_s", number_or_null(std_lap_time)},
          {"mismatch", mismatch_to_json(mismatch)},
          {"episodes", eps}};
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  r.laps = j.at("laps").get<long>();
  r.success_pct = j.at("success_pct").get<double>();
  r.mean_lap_time = number_from(j, "mean_lap_time_s");
  r.std_lap_time = number_from(j, "std_lap_time_s");
  r.mismatch = mismatch_from_json(j.at("mismatch"));
  for (const json& e : j.at("episodes")) {
    EpisodeEval ep;
    ep.episode = e.at("episode").get<long>();
    ep.success = e.at("success").get<bool>();
    const std::string status = e.at("status").get<std::string>();
    ep.status = status == "crashed"        ? EpisodeStatus::Crashed
                : status == "lap_complete" ? EpisodeStatus::LapComplete
                : status == "timeout"      ? EpisodeStatus::Timeout
                                           : EpisodeStatus::Running;
    ep.lap_time = number_from(e, "lap_time_s");
    ep.crash_s = number_from(e, "crash_s");
    ep.crash_x = number_from(e, "crash_x");
    ep.crash_y = number_from(e, "crash_y");
    r.episodes.push_back(ep);
  }
  return r;
}

EvalReport evaluate(const Td3Agent& agent, const RunConfig& config,
                    std::shared_ptr<const TrackGeometry> track,
                    const MismatchSpec& mismatch, int laps,
                    std::uint64_t seed, const std::string& trajectory_dir) {
  if (laps < 1) throw ValidationError("evaluate needs laps >= 1");
  RaceEnv env(track, config.algorithm, config.env_config(true));
  if (agent.obs_dim() != env.observation_dim()) {
    throw ValidationError(
        "checkpoint observation dimension (" +
        std::to_string(agent.obs_dim()) + ") does not match the track/lidar "
        "configuration (" + std::to_string(env.observation_dim()) + ")");
  }
  if (!trajectory_dir.empty()) ensure_dir(trajectory_dir);

  EvalReport report;
  report.mismatch = mismatch;
  for (int i = 0; i < laps; ++i) {
    std::vector<double> obs =
        env.reset(derive_seed(seed, "eval_episode", i), mismatch);
    std::ofstream traj;
    if (!trajectory_dir.empty()) {
      traj = open_out((fs::path(trajectory_dir) /
                       ("episode_" + std::to_string(i) + ".csv"))
                          .string());
      write_trajectory_header(traj);
    }

    StepInfo last{};
    while (env.status() == EpisodeStatus::Running) {
      const Eigen::VectorXd a = agent.act(to_vector(obs));
      const StepResult sr = env.step({a(0), a(1)});
      if (traj.is_open()) write_trajectory_row(traj, sr.info);
      obs = sr.observation;
      last = sr.info;
    }

    EpisodeEval ep;
    ep.episode = i;
    ep.status = env.status();
    ep.success = env.status() == EpisodeStatus::LapComplete;
    ep.lap_time = ep.success ? last.lap_time : kNan;
    if (env.status() == EpisodeStatus::Crashed) {
      ep.crash_s = last.s;
      ep.crash_x = last.x;
      ep.crash_y = last.y;
    } else {
      ep.crash_s = ep.crash_x = ep.crash_y = kNan;
    }
    report.episodes.push_back(ep);
  }
  report.recompute_aggregates();
  return report;
}

MismatchSpec cell_mismatch(SweepKind kind, double value, double position) {
  MismatchSpec spec;
  switch (kind) {
    case SweepKind::Friction:
      spec.mu_override = value;
      break;
    case SweepKind::StiffnessFront:
      spec.c_sf_scale = value;
      break;
    case SweepKind::StiffnessRear:
      spec.c_sr_scale = value;
      break;
    case SweepKind::StiffnessBoth:
      spec.c_sf_scale = value;
      spec.c_sr_scale = value;
      break;
    case SweepKind::Mass:
      spec.added_mass = AddedMass{value, position};
      break;
  }
  return spec;
}

SweepResults run_sweep(const Td3Agent& agent, const RunConfig& config,
                       std::shared_ptr<const TrackGeometry> track,
                       const SweepSpec& spec, std::uint64_t seed,
                       std::ostream* progress) {
  spec.validate(config.vehicle);
  SweepResults out;
  out.kind = spec.kind;
  out.laps_per_cell = spec.laps_per_cell;

  struct CellKey {
    double value;
    double position;
  };
  std::vector<CellKey> keys;
  if (spec.kind == SweepKind::Mass) {
    for (double m : spec.values) {
      for (double p : spec.positions) keys.push_back({m, p});
    }
  } else {
    for (double v : spec.values) keys.push_back({v, kNan});
  }

  for (std::size_t c = 0; c < keys.size(); ++c) {
    SweepCell cell;
    cell.value = keys[c].value;
    cell.position = keys[c].position;
    const std::uint64_t cell_seed = derive_seed(seed, "cell", c);
    try {
      const MismatchSpec mismatch =
          cell_mismatch(spec.kind, cell.value, cell.position);
      cell.report = evaluate(agent, config, track, mismatch,
                             spec.laps_per_cell, cell_seed);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
    if (progress) {
      (*progress) << "cell " << (c + 1) << "/" << keys.size() << " value "
                  << cell.value;
      if (spec.kind == SweepKind::Mass) {
        (*progress) << " @ " << cell.position << " m";
      }
      if (cell.failed) {
        (*progress) << " FAILED: " << cell.error << '\n';
      } else {
        (*progress) << " -> " << cell.report.success_pct << "% success\n";
      }
      progress->flush();
    }
    out.cells.push_back(std::move(cell));
  }
  return out;
}

json SweepResults::to_json() const {
  json cells_json = json::array();
  for (const SweepCell& c : cells) {
    cells_json.push_back({{"value", c.value},
                          {"position", number_or_null(c.position)},
                          {"failed", c.failed},
                          {"error", c.failed ? json(c.error) : json(nullptr)},
                          {"report", c.failed ? json(nullptr)
                                              : c.report.to_json()}});
  }
  return {{"type", "sweep"},
          {"kind", to_string(kind)},
          {"laps_per_cell", laps_per_cell},
          {"cells", cells_json}};
}

SweepResults SweepResults::from_json(const json& j) {
  SweepResults r;
  r.kind = sweep_kind_from_string(j.at("kind").get<std::string>());
  r.laps_per_cell = j.at("laps_per_cell").get<int>();
  for (const json& c : j.at("cells")) {
    SweepCell cell;
    cell.value = c.at("value").get<double>();
    cell.position = number_from(c, "position");
    cell.failed = c.at("failed").get<bool>();
    if (cell.failed) {
      if (!c.at("error").is_null()) cell.error = c.at("error");
    } else {
      cell.report = EvalReport::from_json(c.at("report"));
    }
    r.cells.push_back(std::move(cell));
  }
  return r;
}

namespace {

const char* sweep_key_header(SweepKind kind) {
  switch (kind) {
    case SweepKind::Friction: return "mu";
    case SweepKind::StiffnessFront: return "c_sf_scale";
    case SweepKind::StiffnessRear: return "c_sr_scale";
    case SweepKind::StiffnessBoth: return "c_s_scale";
    case SweepKind::Mass: return "mass_kg,position_m";
  }
  return "value";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double_or_nan(const std::string& s) {
  if (s.empty()) return kNan;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ParseError("bad numeric CSV field: '" + s + "'");
  }
}

}  // namespace

void write_sweep_csv(const SweepResults& results, const std::string& path) {
  std::ofstream out = open_out(path);
  out << sweep_key_header(results.kind)
      << ",success_pct,mean_lap_time_s,laps\n";
  for (const SweepCell& c : results.cells) {
    out << format_double(c.value);
    if (results.kind == SweepKind::Mass) {
      out << ',' << format_double(c.position);
    }
    if (c.failed) {
      out << ",,," << 0 << '\n';
      continue;
    }
    out << ',' << format_double(c.report.success_pct) << ','
        << format_double(c.report.mean_lap_time) << ',' << c.report.laps
        << '\n';
  }
}

std::vector<SweepCsvRow> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty CSV");
  const std::size_t header_fields = split_csv_line(line).size();
  const std::size_t key_fields = header_fields - 3;

  std::vector<SweepCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header_fields) {
      throw ParseError(path + ": ragged CSV row '" + line + "'");
    }
    SweepCsvRow row;
    for (std::size_t k = 0; k < key_fields; ++k) {
      row.key.push_back(parse_double_or_nan(f[k]));
    }
    row.success_pct = parse_double_or_nan(f[key_fields]);
    row.mean_lap_time = parse_double_or_nan(f[key_fields + 1]);
    row.laps = static_cast<long>(parse_double_or_nan(f[key_fields + 2]));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "episode,status,success,lap_time_s,crash_s,crash_x,crash_y\n";
  for (const EpisodeEval& e : report.episodes) {
    out << e.episode << ',' << to_string(e.status) << ','
        << (e.success ? 1 : 0) << ',' << format_double(e.lap_time) << ','
        << format_double(e.crash_s) << ',' << format_double(e.crash_x) << ','
        << format_double(e.crash_y) << '\n';
  }
}

std::vector<EvalCsvRow> read_eval_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty CSV");
  std::vector<EvalCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 7) throw ParseError(path + ": ragged CSV row");
    EvalCsvRow row;
    row.episode = std::stol(f[0]);
    row.status = f[1];
    row.success = f[2] == "1";
    row.lap_time = parse_double_or_nan(f[3]);
    row.crash_s = parse_double_or_nan(f[4]);
    row.crash_x = parse_double_or_nan(f[5]);
    row.crash_y = parse_double_or_nan(f[6]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> export_results(const json& results,
                                        const std::string& format,
                                        const std::string& out_dir) {
  if (format != "csv" && format != "json") {
    throw ValidationError("export format must be 'csv' or 'json'");
  }
  if (!results.contains("type")) {
    throw ParseError("results JSON lacks a 'type' field");
  }
  const std::string type = results.at("type").get<std::string>();
  ensure_dir(out_dir);
  std::vector<std::string> written;
  if (type == "sweep") {
    const SweepResults sweep = SweepResults::from_json(results);
    if (format == "csv") {
      const std::string path = (fs::path(out_dir) / "sweep.csv").string();
      write_sweep_csv(sweep, path);
      written.push_back(path);
    } else {
      const std::string path = (fs::path(out_dir) / "sweep.json").string();
      open_out(path) << sweep.to_json().dump(2) << '\n';
      written.push_back(path);
    }
  } else if (type == "eval") {
    const EvalReport report = EvalReport::from_json(results);
    if (format == "csv") {
      const std::string path = (fs::path(out_dir) / "eval.csv").string();
      write_eval_csv(report, path);
      written.push_back(path);
    } else {
      const std::string path = (fs::path(out_dir) / "eval.json").string();
      open_out(path) << report.to_json().dump(2) << '\n';
      written.push_back(path);
    }
  } else {
    throw ParseError("unknown results type '" + type + "'");
  }
  return written;
}

}  // namespace frenet_racer
