#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <string>

#include <json.hpp>

#include "eegraph/config.hpp"
#include "eegraph/report.hpp"
#include "support.hpp"

using namespace eegraph;
using nlohmann::json;
using test::thrown_code;
using test::thrown_message;

namespace {

std::string write_file(const test::TempDir& tmp, const std::string& name,
                       const std::string& body) {
  const std::string path = (tmp.path() / name).string();
  std::ofstream(path) << body;
  return path;
}

}  // namespace

// ---------------------------------------------------------------------------
// config parsing
// ---------------------------------------------------------------------------

TEST_CASE("an empty config file keeps every published default") {
  test::TempDir tmp("cfg");
  const RunConfig cfg = parse_config(write_file(tmp, "empty.json", "{}"));
  CHECK(cfg.optim.lr == 0.000668);
  CHECK(cfg.optim.weight_decay == 3.53e-5);
  CHECK(cfg.optim.patience == 15);
  CHECK(cfg.model.gat_hidden == 64);
  CHECK(cfg.model.gru_hidden == 128);
  CHECK(cfg.model.gat_heads == 2);
  CHECK(cfg.model.dropout_backbone == 0.182);
  CHECK(cfg.threshold_percentile == 50.0);
  CHECK(cfg.preprocess.bandpass_low_hz == 0.5);
  CHECK(cfg.preprocess.bandpass_high_hz == 45.0);
  CHECK(cfg.preprocess.notch_center_hz == 50.0);
  CHECK(cfg.preprocess.window_count == 30);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{42, 123, 456});
  REQUIRE(cfg.tasks.size() == 1);
  CHECK(cfg.tasks[0] == Task::ET);
}

TEST_CASE("config files override by dotted key") {
  test::TempDir tmp("cfg_keys");
  const std::string body = R"({
    "optim.lr": 0.003,
    "model.gat_hidden": 8,
    "dataset.tasks": ["EC", "ET"],
    "connectivity.threshold_percentile": 60,
    "synth.subjects": 6
  })";
  const RunConfig cfg = parse_config(write_file(tmp, "run.json", body));
  CHECK(cfg.optim.lr == 0.003);
  CHECK(cfg.model.gat_hidden == 8);
  CHECK(cfg.threshold_percentile == 60.0);
  CHECK(cfg.synth.n_subjects == 6);
  REQUIRE(cfg.tasks.size() == 2);
  CHECK(cfg.tasks[0] == Task::EC);
  CHECK(cfg.tasks[1] == Task::ET);
}

TEST_CASE("unknown keys and wrong types are rejected by name") {
  test::TempDir tmp("cfg_bad");
  const std::string unknown = write_file(tmp, "unknown.json", R"({"model.flux": 1})");
  CHECK(thrown_code([&] { parse_config(unknown); }) == Errc::unknown_key);
  CHECK(thrown_message([&] { parse_config(unknown); }).find("model.flux") !=
        std::string::npos);

  const std::string typed = write_file(tmp, "typed.json", R"({"optim.lr": "fast"})");
  CHECK(thrown_code([&] { parse_config(typed); }) == Errc::bad_value_type);
  CHECK(thrown_message([&] { parse_config(typed); }).find("optim.lr") !=
        std::string::npos);

  const std::string garbled = write_file(tmp, "garbled.json", "{nope");
  CHECK(thrown_code([&] { parse_config(garbled); }) == Errc::bad_value_type);
}

TEST_CASE("overrides parse values like the file would") {
  RunConfig cfg;
  apply_override(cfg, "optim.epochs", "40");
  apply_override(cfg, "connectivity.metric", "wpli");
  apply_override(cfg, "seeds", "[7, 8]");
  apply_override(cfg, "dataset.root", "/tmp/data");
  CHECK(cfg.optim.epochs == 40);
  CHECK(cfg.graph_metric == ConnMetric::WPLI);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{7, 8});
  CHECK(cfg.dataset_root == "/tmp/data");

  CHECK(thrown_code([&] { apply_override(cfg, "no.such.key", "1"); }) ==
        Errc::unknown_key);
  CHECK(thrown_code([&] { apply_override(cfg, "optim.lr", "\"fast\""); }) ==
        Errc::bad_value_type);
}

TEST_CASE("the serialized snapshot is stable, sorted, and hash-sensitive") {
  RunConfig cfg;
  const std::string snap = serialize_config(cfg);
  CHECK(snap == serialize_config(cfg));

  const json j = json::parse(snap);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(std::is_sorted(keys.begin(), keys.end()));
  for (const std::string& k : config_keys()) CHECK(j.contains(k));

  const std::uint64_t h0 = config_hash(cfg);
  cfg.optim.lr = 0.12345;
  CHECK(config_hash(cfg) != h0);
}

TEST_CASE("a config snapshot reloads to the same hash") {
  RunConfig cfg;
  cfg.optim.epochs = 7;
  cfg.model.gru_hidden = 32;
  cfg.tasks = {Task::M, Task::R};
  test::TempDir tmp("cfg_rt");
  const std::string path = write_file(tmp, "snap.json", serialize_config(cfg));
  const RunConfig back = parse_config(path);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.optim.epochs == 7);
  CHECK(back.tasks == cfg.tasks);
}

TEST_CASE("train settings follow the configured ablation variant") {
  RunConfig cfg;
  cfg.ablation_variant = "spatial_only";
  cfg.save_checkpoints = "all";
  const TrainSettings ts = make_train_settings(cfg, "/tmp/run");
  CHECK(ts.variant == Variant::spatial_only);
  CHECK(ts.save_checkpoints == TrainSettings::SaveCheckpoints::all);
  CHECK(ts.checkpoint_dir == "/tmp/run/checkpoints");

  cfg.ablation_variant = "sideways";
  CHECK(thrown_code([&] { make_train_settings(cfg, "x"); }) == Errc::bad_value_type);
}

// ---------------------------------------------------------------------------
// run artifacts
// ---------------------------------------------------------------------------

namespace {

RunReport tiny_report() {
  RunReport rep;
  rep.variant = "full";
  rep.parameter_count = 1234;
  SeedResult sr;
  sr.seed = 42;
  FoldResult f;
  f.fold.test_subject = "S1";
  f.fold.val_subjects = {"S2", "S3"};
  f.probability = 0.8;
  f.truth = Label::Addicted;
  f.predicted = Label::Addicted;
  f.test_samples.push_back({"S1", Task::ET, 1.2, 0.8});
  sr.folds.push_back(f);
  FoldResult g = f;
  g.fold.test_subject = "S2";
  g.probability = 0.3;
  g.truth = Label::NotAddicted;
  g.predicted = Label::NotAddicted;
  g.test_samples = {{"S2", Task::ET, -0.9, 0.3}};
  sr.folds.push_back(g);
  score_seed(sr);
  rep.seeds.push_back(sr);
  rep.subject_aggregate = aggregate_metrics({rep.seeds[0].subject_metrics});
  rep.sample_aggregate = aggregate_metrics({rep.seeds[0].sample_metrics});
  return rep;
}

}  // namespace

TEST_CASE("run artifacts land next to each other and agree with the report") {
  test::TempDir tmp("artifacts");
  const RunReport rep = tiny_report();
  const RunConfig cfg;
  const auto names = write_run_artifacts(rep, cfg, tmp.path());
  for (const char* want : {"run_report.json", "metrics.csv", "config.json"})
    CHECK(std::find(names.begin(), names.end(), want) != names.end());

  json j;
  std::ifstream(tmp.path() / "run_report.json") >> j;
  CHECK(j.at("variant") == "full");
  CHECK(j.at("parameter_count") == 1234);
  REQUIRE(j.at("seeds").size() == 1);
  CHECK(j.at("seeds")[0].at("folds").size() == 2);
  CHECK(j.at("aggregate").at("subject").at("accuracy").at("mean") == 1.0);

  std::ifstream csv(tmp.path() / "metrics.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line.find("seed") == 0);
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);  // one per seed x fold

  json saved;
  std::ifstream(tmp.path() / "config.json") >> saved;
  CHECK(saved.contains("optim.lr"));
}

TEST_CASE("the summary merges measured runs into the reference table") {
  test::TempDir tmp("summary");
  const RunReport rep = tiny_report();
  RunConfig cfg;
  std::filesystem::create_directories(tmp.path() / "loso");
  write_run_artifacts(rep, cfg, tmp.path() / "loso");
  write_summary(tmp.path());

  json s;
  std::ifstream(tmp.path() / "summary.json") >> s;

  // Reference rows ship even when nothing was measured next to them.
  CHECK(s.at("main").at("reference").at("mean").at("accuracy") == 64.29);
  CHECK(s.at("main").at("reference").at("mean").at("f1") == 71.00);
  CHECK(s.at("main").at("reference").at("sd").at("f1") == 12.10);

  CHECK(s.at("main").at("measured").at("subject").at("mean").at("accuracy") == 100.0);
  CHECK(s.at("flags").at("recall_ge_70_any_seed") == true);

  const auto& missing = s.at("missing");
  CHECK(std::find(missing.begin(), missing.end(),
                  "baseline_logreg/run_report.json") != missing.end());
  CHECK(std::find(missing.begin(), missing.end(), "graphs/pli_wpli_summary.json") !=
        missing.end());
}

TEST_CASE("a recall shortfall is flagged, not failed") {
  test::TempDir tmp("summary_low");
  RunReport rep = tiny_report();
  // Rewrite the single fold outcome: the addicted subject is missed.
  rep.seeds[0].folds[0].predicted = Label::NotAddicted;
  rep.seeds[0].folds[0].probability = 0.2;
  score_seed(rep.seeds[0]);
  rep.subject_aggregate = aggregate_metrics({rep.seeds[0].subject_metrics});
  rep.sample_aggregate = aggregate_metrics({rep.seeds[0].sample_metrics});

  RunConfig cfg;
  std::filesystem::create_directories(tmp.path() / "loso");
  write_run_artifacts(rep, cfg, tmp.path() / "loso");
  write_summary(tmp.path());

  json s;
  std::ifstream(tmp.path() / "summary.json") >> s;
  CHECK(s.at("flags").at("recall_ge_70_any_seed") == false);
  CHECK(s.at("flags").contains("note"));
}
