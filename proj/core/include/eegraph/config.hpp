#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegraph/baseline.hpp"
#include "eegraph/connectivity.hpp"
#include "eegraph/dataset.hpp"
#include "eegraph/evaluation.hpp"
#include "eegraph/features.hpp"
#include "eegraph/model.hpp"
#include "eegraph/optim.hpp"
#include "eegraph/preprocess.hpp"
#include "eegraph/stats.hpp"

namespace eegraph {

struct SynthConfig {
  std::string profile = "planted";  // planted | null
  int n_subjects = 14;
  double base_duration_s = 60.0;
  double sample_rate_hz = 250.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 987654321;
};

/// Every tunable in one flat-keyed config (JSON file of dotted keys).
struct RunConfig {
  std::string dataset_root = "data";
  std::vector<Task> tasks = {Task::ET};
  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds = {42, 123, 456};

  PreprocessConfig preprocess;
  double welch_segment_s = 2.0;
  double welch_overlap = 0.5;
  bool scale_features = true;
  ConnMetric graph_metric = ConnMetric::PLI;
  double threshold_percentile = 50.0;

  ModelConfig model;
  OptimConfig optim;

  std::string ablation_variant = "full";
  std::string save_checkpoints = "first";  // none | first | all

  BaselineConfig baseline;
  std::string stats_test = "mann_whitney";

  int explain_steps = 128;
  int explain_top_k = 15;
  std::string explain_checkpoint;  // empty: resolved under output_dir

  SynthConfig synth;

  /// Welch segment length is configured in seconds; resolve it once the
  /// recording rate is known.
  WelchSpec welch_for(double sample_rate_hz) const {
    WelchSpec w;
    w.segment_len_samples = static_cast<int>(welch_segment_s * sample_rate_hz + 0.5);
    w.overlap_fraction = welch_overlap;
    return w;
  }
};

/// Defaults, overridden by the file's flat dotted keys.
RunConfig parse_config(const std::string& path);

/// Applies one dotted key; the value string is parsed as JSON when possible,
/// otherwise taken as a literal string.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Canonical resolved snapshot: every key, sorted, stable formatting.
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a over the serialized snapshot.
std::uint64_t config_hash(const RunConfig& cfg);

std::vector<std::string> config_keys();

/// Train settings for the configured ablation variant; checkpoints land
/// under run_dir/checkpoints.
TrainSettings make_train_settings(const RunConfig& cfg, const std::string& run_dir);

}  // namespace eegraph
