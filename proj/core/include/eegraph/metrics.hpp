#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eegraph/dataset.hpp"

namespace eegraph {

struct ConfusionCounts {
  int tp = 0, fp = 0, tn = 0, fn = 0;
  int total() const { return tp + fp + tn + fn; }
};

struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  // Metrics zeroed by a division guard, by name.
  std::vector<std::string> zero_division_flags;
};

struct ScoredLabel {
  double probability = 0.0;
  Label truth = Label::NotAddicted;
};

double sigmoid(double x);

/// probability = mean sigmoid(logit); Addicted iff probability > 0.5.
std::pair<double, Label> aggregate_subject(const std::vector<double>& logits);

ConfusionCounts count_confusion(const std::vector<std::pair<Label, Label>>& predicted_truth);

/// Rank-statistic AUC (pair counting, ties at 0.5). Single-class input
/// returns 0 and sets *degenerate.
double roc_auc(const std::vector<ScoredLabel>& scores, bool* degenerate = nullptr);

/// Accuracy/precision/recall/F1 from counts, AUC from scores. Division by
/// zero yields 0 for that metric plus a named flag.
MetricSet compute_metrics(const ConfusionCounts& cc, const std::vector<ScoredLabel>& scores);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // population
};

MeanSd mean_sd(const std::vector<double>& xs);

}  // namespace eegraph
