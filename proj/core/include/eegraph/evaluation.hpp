#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eegraph/connectivity.hpp"
#include "eegraph/dataset.hpp"
#include "eegraph/error.hpp"
#include "eegraph/features.hpp"
#include "eegraph/metrics.hpp"
#include "eegraph/model.hpp"
#include "eegraph/optim.hpp"

namespace eegraph {

/// Worker count for fold/seed jobs: EEGRAPH_THREADS if set, else 1.
int configured_threads();

enum class Variant { full, spatial_only, fully_connected };
const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct FoldSpec {
  std::string test_subject;
  std::vector<std::string> train_subjects;  // every non-test subject
  std::vector<std::string> val_subjects;    // 2 of the train pool, one per class

  /// Train subjects that actually receive gradient updates.
  std::vector<std::string> gradient_subjects() const;
};

/// One fold per subject; the validation pair is drawn deterministically from
/// the seed, one subject per class, never the test subject.
std::vector<FoldSpec> loso_folds(const std::vector<SubjectLabel>& subjects,
                                 std::uint64_t seed);

/// One model input sequence: a subject/task recording as a dynamic graph
/// with unscaled node features.
struct SubjectSample {
  std::string subject_id;
  Task task = Task::ET;
  Label label = Label::NotAddicted;
  DynamicGraphSequence sequence;
};

struct ExperimentData {
  std::vector<SubjectSample> samples;
  std::vector<SubjectLabel> subjects;
};

struct TrainSettings {
  ModelConfig model;
  OptimConfig optim;
  Variant variant = Variant::full;
  bool scale_features = true;
  enum class SaveCheckpoints { none, first, all };
  SaveCheckpoints save_checkpoints = SaveCheckpoints::none;
  std::string checkpoint_dir;
};

struct SamplePrediction {
  std::string subject_id;
  Task task = Task::ET;
  double logit = 0.0;
  double probability = 0.0;
};

/// Data actually used by a fold, for leakage audits.
struct FoldProvenance {
  std::vector<std::string> scaler_subjects;
  std::vector<std::string> gradient_subjects;
  std::vector<std::string> val_subjects;
};

struct FoldResult {
  FoldSpec fold;
  FoldProvenance provenance;
  std::vector<SamplePrediction> test_samples;
  double probability = 0.0;
  Label truth = Label::NotAddicted;
  Label predicted = Label::NotAddicted;
  int epochs_run = 0;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  double train_seconds = 0.0;
  std::string checkpoint_path;
  std::string error;  // non-empty when the fold aborted
};

FoldResult train_fold(const ExperimentData& data, const FoldSpec& fold,
                      const TrainSettings& settings, std::uint64_t seed,
                      int fold_index);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  ConfusionCounts subject_counts;
  MetricSet subject_metrics;
  ConfusionCounts sample_counts;
  MetricSet sample_metrics;
};

struct MetricAggregate {
  MetricSet mean;
  MetricSet sd;  // population
};

struct RunReport {
  std::string variant;
  std::vector<SeedResult> seeds;
  MetricAggregate subject_aggregate;
  MetricAggregate sample_aggregate;
  std::size_t parameter_count = 0;
  int threads = 1;
};

/// Subject- and sample-level metrics for one seed's fold results.
void score_seed(SeedResult& seed_result);

MetricAggregate aggregate_metrics(const std::vector<MetricSet>& per_seed);

/// Full LOSO per seed. Fold errors are recorded, not propagated.
RunReport run_experiment(const ExperimentData& data, const TrainSettings& settings,
                         const std::vector<std::uint64_t>& seeds,
                         WarningLog* log = nullptr);

/// The transform applied to every sample before it reaches the model:
/// scaled node features, and the complete graph when the fully_connected
/// variant is active.
DynamicGraphSequence scale_sequence(const DynamicGraphSequence& seq,
                                    const ScalerStats& scaler, bool fully_connected);

/// Builds per-subject/task dynamic graph sequences from raw recordings.
ExperimentData prepare_experiment_data(const Dataset& ds,
                                       const std::vector<Task>& tasks,
                                       const PreprocessConfig& pre,
                                       const WelchSpec& welch,
                                       ConnMetric metric,
                                       double threshold_percentile,
                                       WarningLog* log = nullptr);

}  // namespace eegraph
