#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eegraph/features.hpp"
#include "eegraph/model.hpp"

namespace eegraph {

struct OptimConfig {
  double lr = 0.000668;
  double weight_decay = 3.53e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 100;
  int patience = 15;
  int batch_size = 8;
};

/// lr = 0.5 * base * (1 + cos(pi * step / total_steps))
double cosine_lr(int step, int total_steps, double base_lr);

/// Adam with decoupled weight decay. Moments mirror the parameter store.
class AdamW {
 public:
  AdamW(const OptimConfig& cfg, const ParamStore& params);

  /// grads aligned with store order; lr_t is the scheduled rate for this step.
  void step(ParamStore& params, const std::vector<Matrix>& grads, double lr_t);

  int step_count() const { return t_; }

 private:
  OptimConfig cfg_;
  std::vector<Matrix> m_, v_;
  int t_ = 0;
};

/// Training context a checkpoint carries beyond the weights: the ablation
/// variant and the feature scaler fitted on the fold's gradient subjects.
struct CheckpointExtras {
  std::string variant = "full";
  std::optional<ScalerStats> scaler;
};

/// Self-describing JSON checkpoint: config header + named row-major tensors.
void save_checkpoint(const std::string& path, const Model& model,
                     const OptimConfig& optim,
                     const CheckpointExtras* extras = nullptr);
Model load_checkpoint(const std::string& path, OptimConfig* optim = nullptr,
                      CheckpointExtras* extras = nullptr);

}  // namespace eegraph
