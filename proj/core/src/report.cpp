#include "eegraph/report.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "eegraph/csv.hpp"

namespace eegraph {

using nlohmann::json;

const char* library_version() { return "0.1.0"; }

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::missing_file, "cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

void write_manifest(const RunManifest& m, const std::filesystem::path& dir) {
  json j;
  j["format"] = "eegraph.manifest.v1";
  j["command"] = m.command;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(m.config_hash));
  j["config_hash"] = std::string(buf);
  j["threads"] = m.threads;
  j["wall_seconds"] = m.wall_seconds;
  j["library_version"] = library_version();
  j["artifacts"] = m.artifacts;
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

namespace {

json metric_json(const MetricSet& m) {
  json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["roc_auc"] = m.roc_auc;
  j["zero_division_flags"] = m.zero_division_flags;
  return j;
}

json counts_json(const ConfusionCounts& c) {
  return json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

json aggregate_json(const MetricAggregate& a) {
  json j;
  const MetricSet& m = a.mean;
  const MetricSet& s = a.sd;
  j["accuracy"] = {{"mean", m.accuracy}, {"sd", s.accuracy}};
  j["precision"] = {{"mean", m.precision}, {"sd", s.precision}};
  j["recall"] = {{"mean", m.recall}, {"sd", s.recall}};
  j["f1"] = {{"mean", m.f1}, {"sd", s.f1}};
  j["roc_auc"] = {{"mean", m.roc_auc}, {"sd", s.roc_auc}};
  return j;
}

}  // namespace

std::string run_report_json(const RunReport& rep, const RunConfig& cfg) {
  json j;
  j["format"] = "eegraph.run_report.v1";
  j["variant"] = rep.variant;
  j["threads"] = rep.threads;
  j["parameter_count"] = rep.parameter_count;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  j["config_hash"] = std::string(buf);
  j["config"] = json::parse(serialize_config(cfg));

  j["seeds"] = json::array();
  for (const SeedResult& sr : rep.seeds) {
    json s;
    s["seed"] = sr.seed;
    s["subject_metrics"] = metric_json(sr.subject_metrics);
    s["subject_counts"] = counts_json(sr.subject_counts);
    s["sample_metrics"] = metric_json(sr.sample_metrics);
    s["sample_counts"] = counts_json(sr.sample_counts);
    s["folds"] = json::array();
    for (const FoldResult& fr : sr.folds) {
      json f;
      f["test_subject"] = fr.fold.test_subject;
      f["val_subjects"] = fr.fold.val_subjects;
      f["truth"] = label_name(fr.truth);
      f["predicted"] = label_name(fr.predicted);
      f["probability"] = fr.probability;
      f["epochs_run"] = fr.epochs_run;
      f["best_epoch"] = fr.best_epoch;
      f["best_val_loss"] = fr.best_val_loss;
      if (!fr.checkpoint_path.empty()) f["checkpoint"] = fr.checkpoint_path;
      if (!fr.error.empty()) f["error"] = fr.error;
      json preds = json::array();
      for (const SamplePrediction& p : fr.test_samples) {
        preds.push_back({{"subject", p.subject_id},
                         {"task", task_name(p.task)},
                         {"logit", p.logit},
                         {"probability", p.probability}});
      }
      f["test_samples"] = std::move(preds);
      s["folds"].push_back(std::move(f));
    }
    j["seeds"].push_back(std::move(s));
  }
  j["aggregate"] = {{"subject", aggregate_json(rep.subject_aggregate)},
                    {"sample", aggregate_json(rep.sample_aggregate)}};
  return j.dump(2) + "\n";
}

std::string metrics_csv(const RunReport& rep) {
  std::ostringstream out;
  out << "seed,fold,test_subject,truth,predicted,probability,epochs_run,best_epoch,best_val_loss,error\n";
  for (const SeedResult& sr : rep.seeds) {
    for (std::size_t i = 0; i < sr.folds.size(); ++i) {
      const FoldResult& fr = sr.folds[i];
      std::string err = fr.error;
      for (char& c : err)
        if (c == ',' || c == '\n') c = ';';
      out << sr.seed << ',' << i << ',' << fr.fold.test_subject << ','
          << label_name(fr.truth) << ',' << label_name(fr.predicted) << ','
          << csv::format_double(fr.probability) << ',' << fr.epochs_run << ','
          << fr.best_epoch << ',' << csv::format_double(fr.best_val_loss) << ','
          << err << '\n';
    }
  }
  return out.str();
}

std::vector<std::string> write_run_artifacts(const RunReport& rep, const RunConfig& cfg,
                                             const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "run_report.json", run_report_json(rep, cfg));
  write_text_atomic(dir / "metrics.csv", metrics_csv(rep));
  write_text_atomic(dir / "config.json", serialize_config(cfg));
  return {"run_report.json", "metrics.csv", "config.json"};
}

// ---------------------------------------------------------------------------
// Summary merger
// ---------------------------------------------------------------------------

namespace {

// Reference results the summary places next to measured values. Display
// only; nothing here is asserted.
json reference_main_rows() {
  auto row = [](double a, double p, double r, double f, double auc) {
    return json{{"accuracy", a}, {"precision", p}, {"recall", r}, {"f1", f}, {"roc_auc", auc}};
  };
  json j;
  j["seed_42"] = row(57.14, 54.55, 85.71, 66.67, 59.18);
  j["seed_123"] = row(78.57, 77.78, 100.00, 87.50, 89.80);
  j["seed_456"] = row(57.14, 50.00, 71.43, 58.82, 44.90);
  j["mean"] = row(64.29, 60.77, 85.71, 71.00, 64.63);
  j["sd"] = row(15.43, 12.17, 11.66, 12.10, 18.73);
  return j;
}

json reference_baseline_rows() {
  json j;
  j["logreg"] = {{"accuracy", 62.14}, {"precision", 50.00}, {"recall", 29.29},
                 {"f1", 34.73}, {"roc_auc", 50.00}};
  j["mlp"] = {{"accuracy", 51.90}, {"precision", 50.00}, {"recall", 26.19},
              {"f1", 32.46}, {"roc_auc", 50.00}};
  return j;
}

json reference_ablation_rows() {
  json j;
  j["full"] = {{"accuracy", 64.29}, {"f1", 71.00}, {"delta_f1", 0.0}};
  j["spatial_only"] = {{"accuracy", 42.86}, {"f1", 50.00}, {"delta_f1", -21.00}};
  j["fully_connected"] = {{"accuracy", 14.29}, {"f1", 14.29}, {"delta_f1", -56.71}};
  return j;
}

json reference_group_pvalues() {
  return json{{"M.Alpha", 0.0002}, {"M.Theta", 0.0014}, {"F.Alpha", 0.0029},
              {"F.Gamma", 0.0192}, {"C.Alpha", 0.0044}};
}

std::optional<json> try_load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

double pct(double x) { return 100.0 * x; }

json metric_row_pct(const json& m) {
  json j;
  for (const char* k : {"accuracy", "precision", "recall", "f1", "roc_auc"})
    j[k] = pct(m.at(k).get<double>());
  return j;
}

// Per-seed rows plus mean/sd, all in percent, from a run_report.json.
json measured_from_report(const json& rep, const char* level) {
  json j;
  for (const auto& s : rep.at("seeds")) {
    const std::string key = "seed_" + std::to_string(s.at("seed").get<std::uint64_t>());
    j[key] = metric_row_pct(s.at(std::string(level) + "_metrics"));
  }
  const json& agg = rep.at("aggregate").at(level);
  json mean, sd;
  for (const char* k : {"accuracy", "precision", "recall", "f1", "roc_auc"}) {
    mean[k] = pct(agg.at(k).at("mean").get<double>());
    sd[k] = pct(agg.at(k).at("sd").get<double>());
  }
  j["mean"] = mean;
  j["sd"] = sd;
  return j;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  if (!in) return rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(csv::split(line));
  }
  return rows;
}

}  // namespace

std::string summary_json(const std::filesystem::path& out_dir) {
  json s;
  s["format"] = "eegraph.summary.v1";
  std::vector<std::string> missing;

  // Main LOSO results.
  if (auto rep = try_load_json(out_dir / "loso" / "run_report.json")) {
    s["main"]["measured"]["subject"] = measured_from_report(*rep, "subject");
    s["main"]["measured"]["sample"] = measured_from_report(*rep, "sample");
    bool recall_ok = false;
    for (const auto& seed : rep->at("seeds"))
      if (seed.at("subject_metrics").at("recall").get<double>() >= 0.70) recall_ok = true;
    s["flags"]["recall_ge_70_any_seed"] = recall_ok;
    if (!recall_ok)
      s["flags"]["note"] = "no seed reached 70% subject-level recall";
  } else {
    missing.push_back("loso/run_report.json");
  }
  s["main"]["reference"] = reference_main_rows();

  // Baselines.
  for (const char* kind : {"logreg", "mlp"}) {
    const auto path = out_dir / (std::string("baseline_") + kind) / "run_report.json";
    if (auto rep = try_load_json(path)) {
      s["baselines"]["measured"][kind] = measured_from_report(*rep, "subject");
    } else {
      missing.push_back(std::string("baseline_") + kind + "/run_report.json");
    }
  }
  s["baselines"]["reference"] = reference_baseline_rows();

  // Ablations; the full variant doubles as the loso run.
  double full_f1 = 0.0;
  bool have_full = false;
  for (const char* v : {"full", "spatial_only", "fully_connected"}) {
    std::filesystem::path path = out_dir / (std::string("ablate_") + v) / "run_report.json";
    if (v == std::string("full") && !std::filesystem::exists(path))
      path = out_dir / "loso" / "run_report.json";
    auto rep = try_load_json(path);
    if (!rep) {
      missing.push_back(std::string("ablate_") + v + "/run_report.json");
      continue;
    }
    const json& agg = rep->at("aggregate").at("subject");
    json row;
    row["accuracy"] = pct(agg.at("accuracy").at("mean").get<double>());
    row["f1"] = pct(agg.at("f1").at("mean").get<double>());
    if (v == std::string("full")) {
      full_f1 = row["f1"].get<double>();
      have_full = true;
      row["delta_f1"] = 0.0;
    } else if (have_full) {
      row["delta_f1"] = row["f1"].get<double>() - full_f1;
    }
    s["ablations"]["measured"][v] = row;
  }
  s["ablations"]["reference"] = reference_ablation_rows();

  // PLI vs wPLI agreement.
  if (auto rep = try_load_json(out_dir / "graphs" / "pli_wpli_summary.json")) {
    s["pli_wpli"]["measured"] = *rep;
  } else {
    missing.push_back("graphs/pli_wpli_summary.json");
  }
  s["pli_wpli"]["reference"] = {{"mean_r", 0.623}, {"mean_ratio", 2.5}};

  // Group statistics: the per-band p-values quoted for M, F, and C.
  {
    const auto rows = read_csv_rows(out_dir / "group_stats" / "band_power_tests.csv");
    if (rows.size() > 1) {
      std::map<std::string, double> p;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() < 4) continue;
        p[rows[i][0] + "." + rows[i][1]] = std::stod(rows[i][3]);
      }
      json measured;
      for (const auto& [key, ref] : reference_group_pvalues().items()) {
        (void)ref;
        if (p.count(key)) measured[key] = p.at(key);
      }
      s["group_stats"]["measured"] = measured;
    } else {
      missing.push_back("group_stats/band_power_tests.csv");
    }
  }
  s["group_stats"]["reference"] = reference_group_pvalues();

  // Attribution shares and top connections.
  {
    const auto rows = read_csv_rows(out_dir / "explain" / "feature_importance.csv");
    if (rows.size() > 1) {
      double beta = 0.0, hjorth = 0.0;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() < 2) continue;
        const double v = std::stod(rows[i][1]);
        if (rows[i][0] == "Beta") beta = v;
        if (rows[i][0] == "HjorthActivity" || rows[i][0] == "HjorthMobility" ||
            rows[i][0] == "HjorthComplexity")
          hjorth += v;
      }
      s["explain"]["measured"]["beta_share_pct"] = pct(beta);
      s["explain"]["measured"]["hjorth_share_pct"] = pct(hjorth);
    } else {
      missing.push_back("explain/feature_importance.csv");
    }
    const auto edges = read_csv_rows(out_dir / "explain" / "top_edges.csv");
    if (edges.size() > 1) {
      json top = json::array();
      for (std::size_t i = 1; i < edges.size() && top.size() < 3; ++i)
        if (edges[i].size() >= 2) top.push_back(edges[i][1]);
      s["explain"]["measured"]["top_connections"] = top;
    } else {
      missing.push_back("explain/top_edges.csv");
    }
  }
  s["explain"]["reference"] = {{"beta_share_pct", 58.9},
                               {"hjorth_share_pct", 31.2},
                               {"top_connections", {"Fz-Fp2", "P8-Fz", "C4-Fz"}}};

  s["missing"] = missing;
  return s.dump(2) + "\n";
}

void write_summary(const std::filesystem::path& out_dir) {
  write_text_atomic(out_dir / "summary.json", summary_json(out_dir));
}

}  // namespace eegraph
