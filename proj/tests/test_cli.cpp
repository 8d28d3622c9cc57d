#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "eegraph/dataset.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOutcome {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliOutcome run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path out_file = scratch / "stdout.txt";
  const fs::path err_file = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + EEGRAPH_CLI_BIN + "\" " + args + " >\"" +
                          out_file.string() + "\" 2>\"" + err_file.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliOutcome r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

std::string common_flags(const fs::path& root) {
  return "--set dataset.root=" + (root / "data").string() +
         " --set output.dir=" + (root / "out").string() +
         " --set 'dataset.tasks=[\"ET\"]'" +
         " --set synth.subjects=4 --set synth.base_duration_s=4" +
         " --set synth.noise_sd=0.5";
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("synth writes a tree the loader accepts") {
  test::TempDir tmp("cli_synth");
  const CliOutcome r = run_cli(common_flags(tmp.path()) + " synth", tmp.path());
  CHECK(r.exit_code == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("36 recordings") != std::string::npos);

  const eegraph::Dataset ds = eegraph::load_dataset(tmp.path() / "data");
  CHECK(ds.labels.size() == 4);
  CHECK(ds.get("S1", eegraph::Task::ET).n_samples() == 2000);
  CHECK(fs::exists(tmp.path() / "data" / "manifest.json"));
}

TEST_CASE("the analysis stages emit labeled artifacts") {
  test::TempDir tmp("cli_stages");
  REQUIRE(run_cli(common_flags(tmp.path()) + " synth", tmp.path()).exit_code == 0);

  const CliOutcome pre = run_cli(common_flags(tmp.path()) + " preprocess", tmp.path());
  CHECK(pre.exit_code == 0);
  const fs::path out = tmp.path() / "out";
  const std::string summary = slurp(out / "preprocess" / "summary.csv");
  CHECK(count_lines(summary) == 1 + 4);  // header plus one row per subject/task
  CHECK(summary.find("subject,task,") == 0);

  const CliOutcome feat = run_cli(common_flags(tmp.path()) + " features", tmp.path());
  CHECK(feat.exit_code == 0);
  const std::string feats = slurp(out / "features" / "S1_ET.csv");
  CHECK(count_lines(feats) == 1 + 30 * 19);  // 30 windows of 19 channels

  const CliOutcome gr = run_cli(common_flags(tmp.path()) + " graphs", tmp.path());
  CHECK(gr.exit_code == 0);
  CHECK(fs::exists(out / "graphs" / "S1_ET_mean_pli.csv"));
  CHECK(fs::exists(out / "graphs" / "S1_ET_edges.csv"));
  CHECK(fs::exists(out / "graphs" / "pli_wpli.csv"));
  CHECK(fs::exists(out / "graphs" / "manifest.json"));

  json swing;
  std::ifstream(out / "graphs" / "pli_wpli_summary.json") >> swing;
  CHECK(swing.contains("mean_r"));
  CHECK(swing.contains("mean_ratio"));
}

TEST_CASE("training, attribution, and reporting chain end to end") {
  test::TempDir tmp("cli_train");
  const std::string tiny =
      common_flags(tmp.path()) +
      " --set model.gat_hidden=4 --set model.gru_hidden=4 --set model.mlp_hidden=4" +
      " --set optim.epochs=2 --set 'seeds=[42]' --set explain.steps=8" +
      " --set explain.top_k=5";
  REQUIRE(run_cli(common_flags(tmp.path()) + " synth", tmp.path()).exit_code == 0);

  const CliOutcome loso = run_cli(tiny + " loso", tmp.path());
  CHECK(loso.exit_code == 0);
  const fs::path out = tmp.path() / "out";

  json rep;
  std::ifstream(out / "loso" / "run_report.json") >> rep;
  CHECK(rep.at("variant") == "full");
  REQUIRE(rep.at("seeds").size() == 1);
  CHECK(rep.at("seeds")[0].at("folds").size() == 4);
  CHECK(fs::exists(out / "loso" / "metrics.csv"));
  bool have_checkpoint = false;
  for (const auto& e : fs::directory_iterator(out / "loso" / "checkpoints"))
    if (e.path().extension() == ".json") have_checkpoint = true;
  CHECK(have_checkpoint);

  const CliOutcome ex = run_cli(tiny + " explain", tmp.path());
  CHECK(ex.exit_code == 0);
  CHECK(fs::exists(out / "explain" / "channel_importance.csv"));
  CHECK(fs::exists(out / "explain" / "ig_completeness.csv"));
  const std::string top = slurp(out / "explain" / "top_edges.csv");
  CHECK(count_lines(top) == 1 + 5);

  const CliOutcome rp = run_cli(tiny + " report", tmp.path());
  CHECK(rp.exit_code == 0);
  json s;
  std::ifstream(out / "summary.json") >> s;
  CHECK(s.at("main").contains("measured"));
  CHECK(s.at("main").contains("reference"));
  CHECK(s.at("flags").contains("recall_ge_70_any_seed"));
}

TEST_CASE("ablations land in variant-tagged directories") {
  test::TempDir tmp("cli_ablate");
  const std::string tiny =
      common_flags(tmp.path()) +
      " --set model.gat_hidden=4 --set model.gru_hidden=4 --set model.mlp_hidden=4" +
      " --set optim.epochs=1 --set 'seeds=[42]'";
  REQUIRE(run_cli(common_flags(tmp.path()) + " synth", tmp.path()).exit_code == 0);

  const CliOutcome ab =
      run_cli(tiny + " ablate --variant fully_connected", tmp.path());
  CHECK(ab.exit_code == 0);

  json rep;
  std::ifstream(tmp.path() / "out" / "ablate_fully_connected" / "run_report.json") >> rep;
  CHECK(rep.at("variant") == "fully_connected");
}

TEST_CASE("attribution without a checkpoint fails with a usable message") {
  test::TempDir tmp("cli_nockpt");
  REQUIRE(run_cli(common_flags(tmp.path()) + " synth", tmp.path()).exit_code == 0);
  const CliOutcome r = run_cli(common_flags(tmp.path()) + " explain", tmp.path());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("CheckpointNotFound") != std::string::npos);
  CHECK(r.err.find("checkpoint not found") != std::string::npos);
}

TEST_CASE("bad overrides are rejected by key name") {
  test::TempDir tmp("cli_badset");
  const CliOutcome unknown =
      run_cli("--set model.flux=1 synth --root " + (tmp.path() / "x").string(), tmp.path());
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.err.find("UnknownKey") != std::string::npos);
  CHECK(unknown.err.find("model.flux") != std::string::npos);

  const CliOutcome typed = run_cli(
      "--set 'optim.lr=\"fast\"' synth --root " + (tmp.path() / "x").string(), tmp.path());
  CHECK(typed.exit_code == 1);
  CHECK(typed.err.find("TypeError") != std::string::npos);
  CHECK(typed.err.find("optim.lr") != std::string::npos);
}
