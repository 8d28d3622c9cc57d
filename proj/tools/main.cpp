// Batch EEG pipeline driver: dataset generation, preprocessing, features,
// connectivity graphs, LOSO training, ablations, baselines, group stats,
// attribution, and report merging. One flat-keyed JSON config; every run
// directory receives the resolved config, a manifest, and its artifacts.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eegraph/baseline.hpp"
#include "eegraph/config.hpp"
#include "eegraph/csv.hpp"
#include "eegraph/evaluation.hpp"
#include "eegraph/explain.hpp"
#include "eegraph/report.hpp"
#include "eegraph/stats.hpp"
#include "eegraph/synth_profiles.hpp"

namespace fs = std::filesystem;
using namespace eegraph;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
};

RunConfig resolve_config(const GlobalArgs& g) {
  RunConfig cfg = g.config_path.empty() ? RunConfig{} : parse_config(g.config_path);
  for (const std::string& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::bad_value_type, "--set expects key=value, got: " + kv);
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void print_warnings(const WarningLog& log) {
  for (const std::string& w : log.items) std::cerr << "warning: " << w << '\n';
}

double sample_rate_of(const Dataset& ds) {
  for (const auto& [sid, by_task] : ds.recordings)
    for (const auto& [t, rec] : by_task) return rec.sample_rate_hz;
  throw Error(Errc::invalid_spec, "dataset holds no recordings");
}

/// Run-scoped bookkeeping: collects artifact names, then writes the config
/// snapshot and manifest into the run directory.
struct RunScope {
  fs::path dir;
  RunManifest manifest;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  RunScope(const fs::path& d, const std::string& command, const RunConfig& cfg) : dir(d) {
    fs::create_directories(dir);
    manifest.command = command;
    manifest.config_hash = config_hash(cfg);
    manifest.threads = configured_threads();
    write_text_atomic(dir / "config.json", serialize_config(cfg));
    manifest.artifacts.push_back("config.json");
  }

  void add(const std::string& name) { manifest.artifacts.push_back(name); }

  void finish() {
    std::sort(manifest.artifacts.begin(), manifest.artifacts.end());
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(manifest, dir);
  }
};

void write_labeled_matrix(const fs::path& path, const Matrix& m) {
  const auto& names = channel_names();
  std::ostringstream out;
  out << "channel";
  for (int j = 0; j < m.cols; ++j) out << ',' << names[static_cast<size_t>(j)];
  out << '\n';
  for (int i = 0; i < m.rows; ++i) {
    out << names[static_cast<size_t>(i)];
    for (int j = 0; j < m.cols; ++j) out << ',' << csv::format_double(m(i, j));
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& cfg, const std::string& root_flag) {
  const fs::path root = root_flag.empty() ? fs::path(cfg.dataset_root) : fs::path(root_flag);
  RunScope scope(root, "synth", cfg);
  const Dataset ds = build_synthetic_dataset(cfg.synth);
  save_dataset(ds, root);
  scope.add("labels.csv");
  scope.add("dataset.json");
  for (const auto& [sid, by_task] : ds.recordings)
    for (const auto& [t, rec] : by_task)
      scope.add(sid + "/" + task_name(t) + ".csv");
  scope.finish();
  std::cout << "wrote " << ds.n_recordings() << " recordings for " << ds.labels.size()
            << " subjects under " << root.string() << '\n';
  return 0;
}

int cmd_preprocess(const RunConfig& cfg) {
  WarningLog log;
  const Dataset ds = load_dataset(cfg.dataset_root, &log);
  RunScope scope(fs::path(cfg.output_dir) / "preprocess", "preprocess", cfg);

  std::ostringstream out;
  out << "subject,task,n_samples,window_len_samples,stride_samples,window_count,degenerate_channels\n";
  for (const std::string& sid : ds.subject_ids()) {
    for (Task t : cfg.tasks) {
      const Recording& rec = ds.get(sid, t);
      const PreprocessResult pr = preprocess_recording(rec, cfg.preprocess, &log);
      out << sid << ',' << task_name(t) << ',' << rec.n_samples() << ','
          << pr.windows.plan.window_len_samples << ',' << pr.windows.plan.stride_samples << ','
          << pr.windows.plan.count << ',' << pr.stats.degenerate_channels.size() << '\n';
    }
  }
  write_text_atomic(scope.dir / "summary.csv", out.str());
  scope.add("summary.csv");
  scope.finish();
  print_warnings(log);
  return 0;
}

int cmd_features(const RunConfig& cfg) {
  WarningLog log;
  const Dataset ds = load_dataset(cfg.dataset_root, &log);
  const WelchSpec welch = cfg.welch_for(sample_rate_of(ds));
  RunScope scope(fs::path(cfg.output_dir) / "features", "features", cfg);

  const auto& feat_names = node_feature_names();
  const auto& ch_names = channel_names();
  for (const std::string& sid : ds.subject_ids()) {
    for (Task t : cfg.tasks) {
      const Recording& rec = ds.get(sid, t);
      const PreprocessResult pr = preprocess_recording(rec, cfg.preprocess, &log);
      const std::vector<Matrix> feats =
          extract_node_features(pr.windows, rec.sample_rate_hz, welch);
      std::ostringstream out;
      out << "window,channel";
      for (const std::string& f : feat_names) out << ',' << f;
      out << '\n';
      for (size_t w = 0; w < feats.size(); ++w)
        for (int c = 0; c < feats[w].rows; ++c) {
          out << w << ',' << ch_names[static_cast<size_t>(c)];
          for (int j = 0; j < feats[w].cols; ++j)
            out << ',' << csv::format_double(feats[w](c, j));
          out << '\n';
        }
      const std::string name = sid + "_" + task_name(t) + ".csv";
      write_text_atomic(scope.dir / name, out.str());
      scope.add(name);
    }
  }
  scope.finish();
  print_warnings(log);
  return 0;
}

int cmd_graphs(const RunConfig& cfg) {
  WarningLog log;
  const Dataset ds = load_dataset(cfg.dataset_root, &log);
  RunScope scope(fs::path(cfg.output_dir) / "graphs", "graphs", cfg);
  const auto& ch_names = channel_names();

  std::map<std::string, std::map<Task, WindowedRecording>> all_windows;
  for (const std::string& sid : ds.subject_ids()) {
    for (Task t : cfg.tasks) {
      const Recording& rec = ds.get(sid, t);
      const PreprocessResult pr = preprocess_recording(rec, cfg.preprocess, &log);

      Matrix mean_conn = Matrix::zeros(rec.data.cols, rec.data.cols);
      std::ostringstream edges;
      edges << "window,src,dst,weight\n";
      for (size_t w = 0; w < pr.windows.windows.size(); ++w) {
        const ConnectivityMatrix cm = connectivity(pr.windows.windows[w], cfg.graph_metric, &log);
        for (size_t k = 0; k < mean_conn.v.size(); ++k) mean_conn.v[k] += cm.m.v[k];
        const GraphTopology topo = threshold_graph(cm, cfg.threshold_percentile, &log);
        for (size_t e = 0; e < topo.edges.size(); ++e)
          edges << w << ',' << ch_names[static_cast<size_t>(topo.edges[e].first)] << ','
                << ch_names[static_cast<size_t>(topo.edges[e].second)] << ','
                << csv::format_double(topo.weights[e]) << '\n';
      }
      const double nw = static_cast<double>(pr.windows.windows.size());
      for (double& v : mean_conn.v) v /= nw;

      const std::string stem = sid + std::string("_") + task_name(t);
      write_labeled_matrix(scope.dir / (stem + "_mean_" + conn_metric_name(cfg.graph_metric) + ".csv"),
                           mean_conn);
      scope.add(stem + "_mean_" + conn_metric_name(cfg.graph_metric) + ".csv");
      write_text_atomic(scope.dir / (stem + "_edges.csv"), edges.str());
      scope.add(stem + "_edges.csv");

      all_windows[sid][t] = pr.windows;
    }
  }

  // PLI vs wPLI agreement across all selected recordings.
  const PliWpliReport rep = pli_wpli_comparison(all_windows);
  {
    std::ostringstream out;
    out << "subject,task,pearson_r,mean_pli,mean_wpli\n";
    for (const PliWpliRow& r : rep.rows)
      out << r.subject_id << ',' << task_name(r.task) << ',' << csv::format_double(r.pearson_r)
          << ',' << csv::format_double(r.mean_pli) << ',' << csv::format_double(r.mean_wpli) << '\n';
    write_text_atomic(scope.dir / "pli_wpli.csv", out.str());
    scope.add("pli_wpli.csv");

    std::ostringstream js;
    js << "{\n  \"mean_r\": " << csv::format_double(rep.mean_r)
       << ",\n  \"mean_ratio\": " << csv::format_double(rep.mean_ratio) << "\n}\n";
    write_text_atomic(scope.dir / "pli_wpli_summary.json", js.str());
    scope.add("pli_wpli_summary.json");
  }
  scope.finish();
  print_warnings(log);
  return 0;
}

int run_training(const RunConfig& cfg, const std::string& command, const fs::path& run_dir) {
  WarningLog log;
  const Dataset ds = load_dataset(cfg.dataset_root, &log);
  const WelchSpec welch = cfg.welch_for(sample_rate_of(ds));
  RunScope scope(run_dir, command, cfg);

  const ExperimentData data = prepare_experiment_data(
      ds, cfg.tasks, cfg.preprocess, welch, cfg.graph_metric, cfg.threshold_percentile, &log);
  const TrainSettings settings = make_train_settings(cfg, run_dir.string());
  const RunReport rep = run_experiment(data, settings, cfg.seeds, &log);

  for (const std::string& a : write_run_artifacts(rep, cfg, run_dir)) scope.add(a);
  for (const SeedResult& sr : rep.seeds)
    for (const FoldResult& fr : sr.folds)
      if (!fr.checkpoint_path.empty())
        scope.add(fs::relative(fr.checkpoint_path, run_dir).string());
  scope.finish();
  print_warnings(log);

  const MetricSet& m = rep.subject_aggregate.mean;
  std::printf("%s (%s): accuracy %.2f%%  f1 %.2f%%  over %zu seeds x %zu folds\n",
              command.c_str(), rep.variant.c_str(), 100.0 * m.accuracy, 100.0 * m.f1,
              rep.seeds.size(), rep.seeds.empty() ? 0 : rep.seeds.front().folds.size());
  return 0;
}

int cmd_baseline(const RunConfig& cfg, const std::string& kind_name) {
  WarningLog log;
  const BaselineKind kind = baseline_kind_from_name(kind_name);
  const Dataset ds = load_dataset(cfg.dataset_root, &log);
  const WelchSpec welch = cfg.welch_for(sample_rate_of(ds));
  const fs::path run_dir = fs::path(cfg.output_dir) / (std::string("baseline_") + kind_name);
  RunScope scope(run_dir, "baseline", cfg);

  const BaselineData data = prepare_baseline_data(ds, cfg.tasks, cfg.preprocess, welch, &log);
  BaselineConfig bc = cfg.baseline;
  bc.scale_features = cfg.scale_features;
  const RunReport rep = run_baseline(data, kind, bc, cfg.seeds, &log);

  for (const std::string& a : write_run_artifacts(rep, cfg, run_dir)) scope.add(a);
  scope.finish();
  print_warnings(log);

  const MetricSet& m = rep.subject_aggregate.mean;
  std::printf("baseline %s: accuracy %.2f%%  f1 %.2f%%\n", kind_name.c_str(),
              100.0 * m.accuracy, 100.0 * m.f1);
  return 0;
}

int cmd_stats(const RunConfig& cfg) {
  WarningLog log;
  const Dataset ds = load_dataset(cfg.dataset_root, &log);
  const WelchSpec welch = cfg.welch_for(sample_rate_of(ds));
  RunScope scope(fs::path(cfg.output_dir) / "group_stats", "stats", cfg);

  const GroupStatsReport rep =
      group_stats(ds, cfg.preprocess, welch, group_test_from_name(cfg.stats_test), &log);

  std::ostringstream out;
  out << "task,band,test,p_value,statistic,mean_addicted,mean_not_addicted\n";
  for (const BandPowerTest& t : rep.band_tests)
    out << task_name(t.task) << ',' << t.band << ',' << rep.test_name << ','
        << csv::format_double(t.p_value) << ',' << csv::format_double(t.statistic) << ','
        << csv::format_double(t.mean_addicted) << ',' << csv::format_double(t.mean_not_addicted)
        << '\n';
  write_text_atomic(scope.dir / "band_power_tests.csv", out.str());
  scope.add("band_power_tests.csv");

  for (const ConditionConnectivity& cc : rep.connectivity) {
    const std::string task = task_name(cc.task);
    write_labeled_matrix(scope.dir / ("wpli_addicted_" + task + ".csv"), cc.mean_addicted);
    write_labeled_matrix(scope.dir / ("wpli_not_addicted_" + task + ".csv"), cc.mean_not_addicted);
    write_labeled_matrix(scope.dir / ("wpli_diff_" + task + ".csv"), cc.difference);
    scope.add("wpli_addicted_" + task + ".csv");
    scope.add("wpli_not_addicted_" + task + ".csv");
    scope.add("wpli_diff_" + task + ".csv");
  }
  scope.finish();
  print_warnings(log);
  return 0;
}

std::string resolve_checkpoint(const RunConfig& cfg) {
  if (!cfg.explain_checkpoint.empty()) return cfg.explain_checkpoint;
  const fs::path dir = fs::path(cfg.output_dir) / "loso" / "checkpoints";
  std::vector<std::string> found;
  if (fs::exists(dir))
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".json") found.push_back(entry.path().string());
  if (found.empty())
    throw Error(Errc::checkpoint_not_found,
                "checkpoint not found: set explain.checkpoint or run `loso` with "
                "artifacts.save_checkpoints != none");
  std::sort(found.begin(), found.end());
  return found.front();
}

int cmd_explain(const RunConfig& cfg) {
  WarningLog log;
  const std::string ckpt_path = resolve_checkpoint(cfg);
  CheckpointExtras extras;
  const Model model = load_checkpoint(ckpt_path, nullptr, &extras);

  const Dataset ds = load_dataset(cfg.dataset_root, &log);
  const WelchSpec welch = cfg.welch_for(sample_rate_of(ds));
  const ExperimentData data = prepare_experiment_data(
      ds, cfg.tasks, cfg.preprocess, welch, cfg.graph_metric, cfg.threshold_percentile, &log);

  ScalerStats scaler;
  if (extras.scaler) {
    scaler = *extras.scaler;
  } else {
    std::vector<Matrix> feats;
    for (const SubjectSample& s : data.samples)
      for (const GraphSnapshot& snap : s.sequence.snapshots)
        feats.push_back(snap.node_features);
    scaler = fit_feature_scaler(feats, &log);
    warn(&log, "checkpoint carries no scaler; fitted one on the full dataset");
  }
  const bool fc = extras.variant == "fully_connected";

  RunScope scope(fs::path(cfg.output_dir) / "explain", "explain", cfg);
  scope.manifest.artifacts.push_back("checkpoint: " + ckpt_path);

  std::vector<DynamicGraphSequence> prepared;
  prepared.reserve(data.samples.size());
  for (const SubjectSample& s : data.samples)
    prepared.push_back(scale_sequence(s.sequence, scaler, fc));

  const auto& ch_names = channel_names();
  const auto& feat_names = node_feature_names();

  AttributionMap merged;
  merged.steps = cfg.explain_steps;
  std::ostringstream attr_csv, comp_csv;
  attr_csv << "subject,task,window,channel,feature,value\n";
  comp_csv << "subject,task,attribution_sum,model_at_input,model_at_baseline,relative_error\n";
  for (size_t i = 0; i < prepared.size(); ++i) {
    const SubjectSample& src = data.samples[i];
    const AttributionMap attr = integrated_gradients(model, prepared[i], cfg.explain_steps);
    const IgCompleteness comp = ig_completeness(model, prepared[i], attr);
    comp_csv << src.subject_id << ',' << task_name(src.task) << ','
             << csv::format_double(comp.attribution_sum) << ','
             << csv::format_double(comp.model_at_input) << ','
             << csv::format_double(comp.model_at_baseline) << ','
             << csv::format_double(comp.relative_error) << '\n';
    for (size_t w = 0; w < attr.windows.size(); ++w) {
      const Matrix& m = attr.windows[w];
      for (int c = 0; c < m.rows; ++c)
        for (int f = 0; f < m.cols; ++f)
          attr_csv << src.subject_id << ',' << task_name(src.task) << ',' << w << ','
                   << ch_names[static_cast<size_t>(c)] << ',' << feat_names[static_cast<size_t>(f)]
                   << ',' << csv::format_double(m(c, f)) << '\n';
      merged.windows.push_back(m);
    }
  }
  write_text_atomic(scope.dir / "ig_attributions.csv", attr_csv.str());
  scope.add("ig_attributions.csv");
  write_text_atomic(scope.dir / "ig_completeness.csv", comp_csv.str());
  scope.add("ig_completeness.csv");

  {
    const std::vector<double> ci = channel_importance(merged);
    std::ostringstream out;
    out << "channel,importance\n";
    for (size_t c = 0; c < ci.size(); ++c)
      out << ch_names[c] << ',' << csv::format_double(ci[c]) << '\n';
    write_text_atomic(scope.dir / "channel_importance.csv", out.str());
    scope.add("channel_importance.csv");
  }
  {
    const std::vector<double> fi = feature_importance(merged);
    std::ostringstream out;
    out << "feature,importance\n";
    for (size_t f = 0; f < fi.size(); ++f)
      out << feat_names[f] << ',' << csv::format_double(fi[f]) << '\n';
    write_text_atomic(scope.dir / "feature_importance.csv", out.str());
    scope.add("feature_importance.csv");
  }
  {
    std::vector<const DynamicGraphSequence*> ptrs;
    for (const DynamicGraphSequence& s : prepared) ptrs.push_back(&s);
    const Matrix imp = edge_importance(model, ptrs);
    write_labeled_matrix(scope.dir / "edge_importance.csv", imp);
    scope.add("edge_importance.csv");

    std::vector<std::string> names(ch_names.begin(), ch_names.end());
    const int pairs = imp.rows * (imp.rows - 1) / 2;
    const auto top = top_connections(imp, std::min(cfg.explain_top_k, pairs), names);
    std::ostringstream out;
    out << "rank,connection,importance\n";
    for (size_t r = 0; r < top.size(); ++r)
      out << (r + 1) << ',' << top[r].label << ',' << csv::format_double(top[r].importance) << '\n';
    write_text_atomic(scope.dir / "top_edges.csv", out.str());
    scope.add("top_edges.csv");
  }
  scope.finish();
  print_warnings(log);
  return 0;
}

int cmd_report(const RunConfig& cfg) {
  RunScope scope(cfg.output_dir, "report", cfg);
  write_summary(cfg.output_dir);
  scope.add("summary.json");
  scope.finish();
  std::cout << "wrote " << (fs::path(cfg.output_dir) / "summary.json").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG connectivity-graph classification pipeline"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "JSON config of flat dotted keys");
  app.add_option("--set", g.overrides, "Override one config key (key=value), repeatable");

  std::string synth_root;
  auto* sc_synth = app.add_subcommand("synth", "Generate a synthetic dataset tree");
  sc_synth->add_option("--root", synth_root, "Target directory (default dataset.root)");

  auto* sc_pre = app.add_subcommand("preprocess", "Filter, normalize, and window recordings");
  auto* sc_feat = app.add_subcommand("features", "Per-window node feature tables");
  auto* sc_graphs = app.add_subcommand("graphs", "Connectivity matrices and thresholded edges");
  auto* sc_loso = app.add_subcommand("loso", "Leave-one-subject-out training and evaluation");

  std::string variant = "spatial_only";
  auto* sc_ablate = app.add_subcommand("ablate", "LOSO with an ablated model variant");
  sc_ablate->add_option("--variant", variant, "full | spatial_only | fully_connected");

  std::string kind = "logreg";
  auto* sc_base = app.add_subcommand("baseline", "Classical baselines on flat window features");
  sc_base->add_option("--kind", kind, "logreg | mlp");

  auto* sc_stats = app.add_subcommand("stats", "Group connectivity/band-power statistics");
  auto* sc_explain = app.add_subcommand("explain", "Attributions from a trained checkpoint");
  auto* sc_report = app.add_subcommand("report", "Merge run outputs into summary.json");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = resolve_config(g);
    if (sc_synth->parsed()) return cmd_synth(cfg, synth_root);
    if (sc_pre->parsed()) return cmd_preprocess(cfg);
    if (sc_feat->parsed()) return cmd_features(cfg);
    if (sc_graphs->parsed()) return cmd_graphs(cfg);
    if (sc_loso->parsed())
      return run_training(cfg, "loso", fs::path(cfg.output_dir) / "loso");
    if (sc_ablate->parsed()) {
      apply_override(cfg, "ablation.variant", variant);
      return run_training(cfg, "ablate",
                          fs::path(cfg.output_dir) / ("ablate_" + cfg.ablation_variant));
    }
    if (sc_base->parsed()) return cmd_baseline(cfg, kind);
    if (sc_stats->parsed()) return cmd_stats(cfg);
    if (sc_explain->parsed()) return cmd_explain(cfg);
    if (sc_report->parsed()) return cmd_report(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
