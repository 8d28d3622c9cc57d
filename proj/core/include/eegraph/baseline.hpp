#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegraph/evaluation.hpp"

namespace eegraph {

enum class BaselineKind { logreg, mlp };
const char* baseline_kind_name(BaselineKind k);
BaselineKind baseline_kind_from_name(const std::string& name);

/// One subject/task recording flattened to per-window feature rows:
/// 19x9 node features plus the 171 whole-recording channel correlations.
struct BaselineSample {
  std::string subject_id;
  Task task = Task::ET;
  Label label = Label::NotAddicted;
  Matrix features;  // n_windows x 342
};

struct BaselineData {
  std::vector<BaselineSample> samples;
  std::vector<SubjectLabel> subjects;
};

BaselineData prepare_baseline_data(const Dataset& ds, const std::vector<Task>& tasks,
                                   const PreprocessConfig& pre, const WelchSpec& welch,
                                   WarningLog* log = nullptr);

struct BaselineConfig {
  bool scale_features = true;
  double logreg_lr = 0.1;
  int logreg_epochs = 500;
  double l2 = 0.01;
  double mlp_lr = 0.001;
  int mlp_epochs = 100;
  int batch_size = 32;
  int patience = 15;
};

FoldResult baseline_fold(const BaselineData& data, const FoldSpec& fold,
                         BaselineKind kind, const BaselineConfig& cfg,
                         std::uint64_t seed, int fold_index);

/// Same LOSO folds and subject aggregation as the main model.
RunReport run_baseline(const BaselineData& data, BaselineKind kind,
                       const BaselineConfig& cfg,
                       const std::vector<std::uint64_t>& seeds,
                       WarningLog* log = nullptr);

}  // namespace eegraph
