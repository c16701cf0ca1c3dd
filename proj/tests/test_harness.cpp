#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "frenet_racer/checkpoint.hpp"
#include "frenet_racer/config.hpp"
#include "frenet_racer/errors.hpp"
#include "frenet_racer/harness.hpp"
#include "frenet_racer/rng.hpp"

using namespace frenet_racer;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() /
                     ("frenet_racer_test_" + tag + "_" +
                      std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Small-but-complete config that trains in a couple of seconds.
RunConfig tiny_config() {
  RunConfig cfg;
  cfg.algorithm = Algorithm::Partial;
  cfg.track = "porto";
  cfg.total_steps = 120;
  cfg.seed = 5;
  cfg.replicas = 1;
  cfg.checkpoint_every = 1000;
  cfg.td3.warmup_steps = 30;
  cfg.td3.batch_size = 8;
  cfg.td3.hidden1 = 12;
  cfg.td3.hidden2 = 10;
  cfg.td3.buffer_capacity = 2000;
  cfg.evaluation.laps = 2;
  return cfg;
}

bool mlp_equal(const Mlp& a, const Mlp& b) {
  if (a.W.size() != b.W.size()) return false;
  for (std::size_t l = 0; l < a.W.size(); ++l) {
    if (a.W[l].rows() != b.W[l].rows() || a.W[l].cols() != b.W[l].cols()) {
      return false;
    }
    if (!(a.W[l].array() == b.W[l].array()).all()) return false;
    if (!(a.b[l].array() == b.b[l].array()).all()) return false;
  }
  return true;
}

bool adam_equal(const AdamState& a, const AdamState& b) {
  if (a.t != b.t || a.m.W.size() != b.m.W.size()) return false;
  for (std::size_t l = 0; l < a.m.W.size(); ++l) {
    if (!(a.m.W[l].array() == b.m.W[l].array()).all()) return false;
    if (!(a.v.W[l].array() == b.v.W[l].array()).all()) return false;
    if (!(a.m.b[l].array() == b.m.b[l].array()).all()) return false;
    if (!(a.v.b[l].array() == b.v.b[l].array()).all()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("run config round-trips through JSON") {
  RunConfig cfg = tiny_config();
  cfg.algorithm = Algorithm::EndToEnd;
  cfg.mismatch.mu_override = 0.8;
  cfg.mismatch.c_sf_scale = 1.1;
  cfg.mismatch.added_mass = AddedMass{0.3, 0.2};
  SweepSpec sweep;
  sweep.kind = SweepKind::Mass;
  sweep.values = {0.3, 1.5};
  sweep.positions = {0.0, 0.1};
  sweep.laps_per_cell = 2;
  cfg.sweep = sweep;
  cfg.log_trajectories = true;

  const json j = cfg.to_json();
  const RunConfig back = RunConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.algorithm == Algorithm::EndToEnd);
  CHECK(back.mismatch.mu_override.has_value());
  CHECK(*back.mismatch.mu_override == 0.8);
  CHECK(back.mismatch.added_mass->mass == 0.3);
  REQUIRE(back.sweep.has_value());
  CHECK(back.sweep->kind == SweepKind::Mass);
  CHECK(back.sweep->positions == std::vector<double>{0.0, 0.1});

  // defaults: an empty object is a valid config equal to the default struct
  CHECK(RunConfig::from_json(json::object()).to_json() ==
        RunConfig{}.to_json());
}

TEST_CASE("unknown config keys fail loudly at every level") {
  CHECK_THROWS_AS(RunConfig::from_json(json{{"bogus", 1}}), ParseError);
  CHECK_THROWS_AS(
      RunConfig::from_json(json{{"td3", {{"gamma", 0.9}, {"oops", 1}}}}),
      ParseError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"vehicle", {{"nope", 1}}}}),
                  ParseError);
  CHECK_THROWS_AS(
      RunConfig::from_json(json{{"evaluation", {{"laps", 5}, {"x", 1}}}}),
      ParseError);
  CHECK_THROWS_AS(
      RunConfig::from_json(json{{"sweep", {{"kind", "friction"},
                                           {"values", {0.9}},
                                           {"weird", true}}}}),
      ParseError);
  // wrong types are parse errors too
  CHECK_THROWS_AS(RunConfig::from_json(json{{"total_steps", "many"}}),
                  ParseError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"algorithm", "magic"}}),
                  ParseError);
}

TEST_CASE("config validation rejects inconsistent settings") {
  RunConfig cfg = tiny_config();
  cfg.total_steps = cfg.td3.warmup_steps;  // must strictly exceed warmup
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  cfg = tiny_config();
  cfg.replicas = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  cfg = tiny_config();
  cfg.track.clear();
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  cfg = tiny_config();
  cfg.evaluation.laps = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  SweepSpec sweep;
  sweep.kind = SweepKind::Friction;
  sweep.values = {0.4};  // below the supported grip range
  CHECK_THROWS_AS(sweep.validate(VehicleParams{}), ValidationError);
  sweep.values = {0.9};
  CHECK_NOTHROW(sweep.validate(VehicleParams{}));
  sweep.kind = SweepKind::Mass;
  sweep.values = {0.7};  // not one of the supported payload levels
  sweep.positions = {0.1};
  CHECK_THROWS_AS(sweep.validate(VehicleParams{}), ValidationError);
  sweep.values = {0.5};
  sweep.positions = {5.0};  // beyond the wheelbase
  CHECK_THROWS_AS(sweep.validate(VehicleParams{}), ValidationError);
}

TEST_CASE("bundled run configs parse, validate, and resolve their tracks") {
  const char* assets = std::getenv("FRENET_RACER_ASSETS");
  REQUIRE(assets != nullptr);
  for (const char* name : {"porto_partial.json", "porto_end_to_end.json"}) {
    const fs::path p = fs::path(assets) / "configs" / name;
    REQUIRE(fs::exists(p));
    const RunConfig cfg = RunConfig::load_file(p.string());
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.track == "porto");
    CHECK(cfg.total_steps == 100000);
    CHECK(cfg.replicas == 3);
    CHECK(cfg.seed == 1);
    CHECK_NOTHROW(TrackGeometry::from_file(resolve_track_path(cfg.track)));
  }
  const RunConfig partial = RunConfig::load_file(
      (fs::path(assets) / "configs" / "porto_partial.json").string());
  CHECK(partial.algorithm == Algorithm::Partial);
  const RunConfig e2e = RunConfig::load_file(
      (fs::path(assets) / "configs" / "porto_end_to_end.json").string());
  CHECK(e2e.algorithm == Algorithm::EndToEnd);

  CHECK_THROWS_AS(resolve_track_path("no_such_track"), ParseError);
}

TEST_CASE("checkpoints round-trip the whole learner state") {
  RunConfig cfg = tiny_config();
  Td3Agent agent(24, 2, cfg.td3, 99);

  // push the optimizer away from its initial state so moments are nontrivial
  ReplayBuffer buffer(256);
  Rng rng(4);
  for (int i = 0; i < 64; ++i) {
    Eigen::VectorXd obs(24), next(24);
    for (int k = 0; k < 24; ++k) {
      obs[k] = rng.uniform();
      next[k] = rng.uniform();
    }
    Eigen::VectorXd act(2);
    act << rng.uniform() * 2 - 1, rng.uniform() * 2 - 1;
    buffer.add({obs, act, rng.uniform(), next, false});
  }
  for (int i = 0; i < 7; ++i) agent.update(buffer, rng);

  const fs::path dir = fresh_dir("ckpt");
  const fs::path path = dir / "agent.bin";
  save_checkpoint(path.string(), agent, cfg, 4321);

  const LoadedCheckpoint loaded = load_checkpoint(path.string());
  CHECK(loaded.train_step == 4321);
  CHECK(loaded.config.to_json() == cfg.to_json());
  REQUIRE(loaded.agent != nullptr);
  CHECK(loaded.agent->update_count() == agent.update_count());
  CHECK(mlp_equal(loaded.agent->actor(), agent.actor()));
  CHECK(mlp_equal(loaded.agent->critic1(), agent.critic1()));
  CHECK(mlp_equal(loaded.agent->critic2(), agent.critic2()));
  CHECK(mlp_equal(loaded.agent->target_actor(), agent.target_actor()));
  CHECK(mlp_equal(loaded.agent->target_critic1(), agent.target_critic1()));
  CHECK(mlp_equal(loaded.agent->target_critic2(), agent.target_critic2()));
  CHECK(adam_equal(loaded.agent->actor_opt(), agent.actor_opt()));
  CHECK(adam_equal(loaded.agent->critic1_opt(), agent.critic1_opt()));
  CHECK(adam_equal(loaded.agent->critic2_opt(), agent.critic2_opt()));

  Eigen::VectorXd probe = Eigen::VectorXd::LinSpaced(24, 0.0, 1.0);
  CHECK((loaded.agent->act(probe).array() == agent.act(probe).array()).all());

  SUBCASE("corrupted files are rejected") {
    const std::string bytes = read_bytes(path);

    write_bytes(dir / "truncated.bin", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_checkpoint((dir / "truncated.bin").string()),
                    CheckpointError);

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    write_bytes(dir / "magic.bin", bad_magic);
    CHECK_THROWS_AS(load_checkpoint((dir / "magic.bin").string()),
                    CheckpointError);

    write_bytes(dir / "trailing.bin", bytes + std::string(1, '\0'));
    CHECK_THROWS_AS(load_checkpoint((dir / "trailing.bin").string()),
                    CheckpointError);

    CHECK_THROWS_AS(load_checkpoint((dir / "missing.bin").string()),
                    CheckpointError);
  }
  fs::remove_all(dir);
}

TEST_CASE("decimal formatting is lossless") {
  Rng rng(8);
  std::vector<double> values{0.1,   1.0 / 3.0, 5.86,  M_PI,  -0.0,
                             1e300, 1e-300,    -2.5e7, 0.0,  123456.789};
  for (int i = 0; i < 200; ++i) {
    values.push_back((rng.uniform() - 0.5) * std::pow(10.0, i % 17 - 8));
  }
  for (double v : values) {
    const std::string s = format_double(v);
    REQUIRE(!s.empty());
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  CHECK(format_double(std::nan("")).empty());
}

TEST_CASE("training is reproducible byte for byte") {
  const RunConfig cfg = tiny_config();
  const fs::path a = fresh_dir("train_a");
  const fs::path b = fresh_dir("train_b");

  const TrainResult ra = train(cfg, a.string());
  const TrainResult rb = train(cfg, b.string());

  CHECK(read_bytes(a / "training_log.jsonl") ==
        read_bytes(b / "training_log.jsonl"));
  CHECK(read_bytes(a / "checkpoint_final.bin") ==
        read_bytes(b / "checkpoint_final.bin"));

  REQUIRE(ra.replicas.size() == 1);
  REQUIRE(rb.replicas.size() == 1);
  CHECK(ra.replicas[0].crash_free_fraction ==
        rb.replicas[0].crash_free_fraction);
  REQUIRE(ra.replicas[0].episodes.size() == rb.replicas[0].episodes.size());
  for (std::size_t i = 0; i < ra.replicas[0].episodes.size(); ++i) {
    const EpisodeLog& ea = ra.replicas[0].episodes[i];
    const EpisodeLog& eb = rb.replicas[0].episodes[i];
    CHECK(ea.status == eb.status);
    CHECK(ea.episode_return == eb.episode_return);
    CHECK(ea.progress == eb.progress);
    CHECK(ea.steps == eb.steps);
  }

  // the final checkpoint reloads and matches the reported path
  const LoadedCheckpoint ck = load_checkpoint(ra.replicas[0].checkpoint_path);
  CHECK(ck.train_step == cfg.total_steps);

  // the log is one JSON object per line, starting with the run config
  std::ifstream log(a / "training_log.jsonl");
  std::string line;
  REQUIRE(std::getline(log, line));
  const json first = json::parse(line);
  CHECK(first.at("event") == "run_config");
  CHECK(RunConfig::from_json(first.at("config")).to_json() == cfg.to_json());
  long episode_events = 0;
  while (std::getline(log, line)) {
    const json j = json::parse(line);  // throws on malformed lines
    if (j.at("event") == "episode") ++episode_events;
  }
  CHECK(episode_events == static_cast<long>(ra.replicas[0].episodes.size()));

  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("multi-replica training writes one directory per replica") {
  RunConfig cfg = tiny_config();
  cfg.total_steps = 60;
  cfg.td3.warmup_steps = 40;
  cfg.replicas = 2;
  const fs::path dir = fresh_dir("train_multi");
  const TrainResult r = train(cfg, dir.string());
  REQUIRE(r.replicas.size() == 2);
  CHECK(fs::exists(dir / "replica_0" / "training_log.jsonl"));
  CHECK(fs::exists(dir / "replica_1" / "training_log.jsonl"));
  CHECK(fs::exists(dir / "replica_0" / "checkpoint_final.bin"));
  // replicas draw different seeds, so their logs differ
  CHECK(read_bytes(dir / "replica_0" / "training_log.jsonl") !=
        read_bytes(dir / "replica_1" / "training_log.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("evaluation reports per-episode outcomes and trajectories") {
  const RunConfig cfg = tiny_config();
  const auto track = std::make_shared<const TrackGeometry>(
      TrackGeometry::from_file(resolve_track_path(cfg.track)));
  const Td3Agent agent(24, 2, cfg.td3, 31);  // untrained: will mostly crash

  const fs::path dir = fresh_dir("eval");
  const EvalReport report =
      evaluate(agent, cfg, track, MismatchSpec{}, 3, 777, dir.string());

  CHECK(report.laps == 3);
  REQUIRE(report.episodes.size() == 3);
  long successes = 0;
  for (const EpisodeEval& e : report.episodes) {
    if (e.success) {
      ++successes;
      CHECK(e.status == EpisodeStatus::LapComplete);
      CHECK(e.lap_time > 0.0);
      CHECK(std::isnan(e.crash_s));
    } else {
      CHECK(std::isnan(e.lap_time));
    }
  }
  CHECK(report.success_pct ==
        doctest::Approx(100.0 * successes / 3.0).epsilon(1e-12));
  if (successes == 0) CHECK(std::isnan(report.mean_lap_time));

  EvalReport redo = report;
  redo.success_pct = -1;
  redo.mean_lap_time = -1;
  redo.recompute_aggregates();
  CHECK(redo.to_json() == report.to_json());

  for (int i = 0; i < 3; ++i) {
    const fs::path traj = dir / ("episode_" + std::to_string(i) + ".csv");
    REQUIRE(fs::exists(traj));
    std::ifstream in(traj);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == "t,x,y,psi,v,s,n,action0,action1,reward");
    std::string row;
    CHECK(std::getline(in, row));  // at least one sample
  }

  // identical seed: identical report
  const EvalReport again =
      evaluate(agent, cfg, track, MismatchSpec{}, 3, 777, "");
  CHECK(again.to_json() == report.to_json());
  // different seed: different episodes (start positions differ)
  const EvalReport other =
      evaluate(agent, cfg, track, MismatchSpec{}, 3, 778, "");
  CHECK(other.to_json() != report.to_json());

  // JSON round-trip, including NaN-as-null fields
  CHECK(EvalReport::from_json(report.to_json()).to_json() ==
        report.to_json());

  fs::remove_all(dir);
}

TEST_CASE("eval CSV round-trips, blank cells mean NaN") {
  EvalReport report;
  report.laps = 2;
  EpisodeEval ok;
  ok.episode = 0;
  ok.status = EpisodeStatus::LapComplete;
  ok.success = true;
  ok.lap_time = 5.8612345678901234;
  ok.crash_s = ok.crash_x = ok.crash_y = std::nan("");
  EpisodeEval crash;
  crash.episode = 1;
  crash.status = EpisodeStatus::Crashed;
  crash.success = false;
  crash.lap_time = std::nan("");
  crash.crash_s = 12.25;
  crash.crash_x = -3.5;
  crash.crash_y = 0.125;
  report.episodes = {ok, crash};
  report.recompute_aggregates();

  const fs::path dir = fresh_dir("csv");
  const fs::path path = dir / "eval.csv";
  write_eval_csv(report, path.string());

  const std::vector<EvalCsvRow> rows = read_eval_csv(path.string());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].status == "lap_complete");
  CHECK(rows[0].success);
  CHECK(rows[0].lap_time == ok.lap_time);  // lossless through the CSV
  CHECK(std::isnan(rows[0].crash_s));
  CHECK(rows[1].status == "crashed");
  CHECK(!rows[1].success);
  CHECK(std::isnan(rows[1].lap_time));
  CHECK(rows[1].crash_x == -3.5);
  fs::remove_all(dir);
}

TEST_CASE("sweep results serialize to JSON and CSV") {
  const RunConfig cfg = tiny_config();
  const auto track = std::make_shared<const TrackGeometry>(
      TrackGeometry::from_file(resolve_track_path(cfg.track)));
  const Td3Agent agent(24, 2, cfg.td3, 31);

  SweepSpec spec;
  spec.kind = SweepKind::Friction;
  spec.values = {1.0, 0.6};
  spec.laps_per_cell = 2;
  const SweepResults results = run_sweep(agent, cfg, track, spec, 55);

  CHECK(results.kind == SweepKind::Friction);
  CHECK(results.laps_per_cell == 2);
  REQUIRE(results.cells.size() == 2);
  CHECK(results.cells[0].value == 1.0);
  CHECK(results.cells[1].value == 0.6);
  for (const SweepCell& c : results.cells) {
    CHECK(!c.failed);
    CHECK(c.report.laps == 2);
    CHECK(c.report.episodes.size() == 2);
  }
  CHECK(SweepResults::from_json(results.to_json()).to_json() ==
        results.to_json());

  const fs::path dir = fresh_dir("sweep");
  const fs::path csv = dir / "sweep.csv";
  write_sweep_csv(results, csv.string());
  const std::vector<SweepCsvRow> rows = read_sweep_csv(csv.string());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].key == std::vector<double>{1.0});
  CHECK(rows[0].success_pct == results.cells[0].report.success_pct);
  CHECK(rows[0].laps == 2);

  // mass sweeps key rows by (mass, position)
  SweepResults mass;
  mass.kind = SweepKind::Mass;
  mass.laps_per_cell = 1;
  SweepCell cell;
  cell.value = 0.5;
  cell.position = 0.165;
  cell.report.laps = 1;
  cell.report.success_pct = 100.0;
  cell.report.mean_lap_time = 6.0;
  mass.cells.push_back(cell);
  const fs::path mass_csv = dir / "mass.csv";
  write_sweep_csv(mass, mass_csv.string());
  const std::vector<SweepCsvRow> mass_rows = read_sweep_csv(mass_csv.string());
  REQUIRE(mass_rows.size() == 1);
  CHECK(mass_rows[0].key == std::vector<double>{0.5, 0.165});
  fs::remove_all(dir);
}

TEST_CASE("sweep cells map to the right model changes") {
  const MismatchSpec mu = cell_mismatch(SweepKind::Friction, 0.7, 0.0);
  REQUIRE(mu.mu_override.has_value());
  CHECK(*mu.mu_override == 0.7);
  CHECK(mu.c_sf_scale == 1.0);
  CHECK(!mu.added_mass.has_value());

  const MismatchSpec front = cell_mismatch(SweepKind::StiffnessFront, 1.2, 0.0);
  CHECK(front.c_sf_scale == 1.2);
  CHECK(front.c_sr_scale == 1.0);
  const MismatchSpec rear = cell_mismatch(SweepKind::StiffnessRear, 0.8, 0.0);
  CHECK(rear.c_sf_scale == 1.0);
  CHECK(rear.c_sr_scale == 0.8);
  const MismatchSpec both = cell_mismatch(SweepKind::StiffnessBoth, 1.1, 0.0);
  CHECK(both.c_sf_scale == 1.1);
  CHECK(both.c_sr_scale == 1.1);

  const MismatchSpec mass = cell_mismatch(SweepKind::Mass, 1.5, 0.2);
  REQUIRE(mass.added_mass.has_value());
  CHECK(mass.added_mass->mass == 1.5);
  CHECK(mass.added_mass->position == 0.2);
  CHECK(!mass.mu_override.has_value());
}

TEST_CASE("export re-emits result JSON as CSV or JSON files") {
  EvalReport report;
  report.laps = 1;
  EpisodeEval e;
  e.episode = 0;
  e.status = EpisodeStatus::Crashed;
  e.lap_time = std::nan("");
  e.crash_s = 1.0;
  e.crash_x = 2.0;
  e.crash_y = 3.0;
  report.episodes = {e};
  report.recompute_aggregates();

  const fs::path dir = fresh_dir("export");
  const std::vector<std::string> csv_files =
      export_results(report.to_json(), "csv", dir.string());
  REQUIRE(csv_files.size() == 1);
  CHECK(fs::path(csv_files[0]).filename() == "eval.csv");
  CHECK(!read_eval_csv(csv_files[0]).empty());

  const std::vector<std::string> json_files =
      export_results(report.to_json(), "json", dir.string());
  REQUIRE(json_files.size() == 1);
  const json reread = json::parse(read_bytes(json_files[0]));
  CHECK(reread == report.to_json());

  CHECK_THROWS_AS(export_results(report.to_json(), "yaml", dir.string()),
                  ValidationError);
  CHECK_THROWS_AS(export_results(json{{"laps", 1}}, "json", dir.string()),
                  ParseError);
  fs::remove_all(dir);
}
