#include "eegraph/metrics.hpp"

#include <cmath>

#include "eegraph/error.hpp"

namespace eegraph {

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

std::pair<double, Label> aggregate_subject(const std::vector<double>& logits) {
  if (logits.empty())
    throw Error(Errc::invalid_spec, "aggregate_subject: no logits");
  double p = 0.0;
  for (double l : logits) p += sigmoid(l);
  p /= static_cast<double>(logits.size());
  return {p, p > 0.5 ? Label::Addicted : Label::NotAddicted};
}

ConfusionCounts count_confusion(const std::vector<std::pair<Label, Label>>& predicted_truth) {
  ConfusionCounts cc;
  for (const auto& [pred, truth] : predicted_truth) {
    if (truth == Label::Addicted)
      (pred == Label::Addicted ? cc.tp : cc.fn)++;
    else
      (pred == Label::Addicted ? cc.fp : cc.tn)++;
  }
  return cc;
}

double roc_auc(const std::vector<ScoredLabel>& scores, bool* degenerate) {
  if (degenerate) *degenerate = false;
  double u = 0.0;
  long long n_pos = 0, n_neg = 0;
  for (const ScoredLabel& s : scores) (s.truth == Label::Addicted ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  for (const ScoredLabel& p : scores) {
    if (p.truth != Label::Addicted) continue;
    for (const ScoredLabel& n : scores) {
      if (n.truth == Label::Addicted) continue;
      if (p.probability > n.probability) u += 1.0;
      else if (p.probability == n.probability) u += 0.5;
    }
  }
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MetricSet compute_metrics(const ConfusionCounts& cc, const std::vector<ScoredLabel>& scores) {
  if (!scores.empty() && static_cast<int>(scores.size()) != cc.total())
    throw Error(Errc::invalid_spec, "compute_metrics: counts disagree with score list");
  MetricSet m;
  auto guarded = [&m](int num, int den, const char* name) {
    if (den == 0) {
      m.zero_division_flags.push_back(name);
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = guarded(cc.tp + cc.tn, cc.total(), "accuracy");
  m.precision = guarded(cc.tp, cc.tp + cc.fp, "precision");
  m.recall = guarded(cc.tp, cc.tp + cc.fn, "recall");
  if (m.precision + m.recall == 0.0) {
    m.f1 = 0.0;
    m.zero_division_flags.push_back("f1");
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  if (scores.empty()) {
    m.roc_auc = 0.0;
    m.zero_division_flags.push_back("roc_auc");
  } else {
    bool degenerate = false;
    m.roc_auc = roc_auc(scores, &degenerate);
    if (degenerate) m.zero_division_flags.push_back("roc_auc");
  }
  return m;
}

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(xs.size()));
  return out;
}

}  // namespace eegraph
