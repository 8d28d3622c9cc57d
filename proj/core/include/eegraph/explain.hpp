#pragma once

#include <string>
#include <vector>

#include "eegraph/connectivity.hpp"
#include "eegraph/matrix.hpp"
#include "eegraph/model.hpp"

namespace eegraph {

struct AttributionMap {
  std::vector<Matrix> windows;  // signed, one n_nodes x n_features matrix per window
  int steps = 128;
  std::string baseline = "zero_features";
};

/// Integrated Gradients against a zero-feature baseline on the sample's own
/// topology, midpoint Riemann rule.
AttributionMap integrated_gradients(const Model& model, const DynamicGraphSequence& seq,
                                    int steps = 128);

struct IgCompleteness {
  double attribution_sum = 0.0;
  double model_at_input = 0.0;
  double model_at_baseline = 0.0;
  double relative_error = 0.0;
};

IgCompleteness ig_completeness(const Model& model, const DynamicGraphSequence& seq,
                               const AttributionMap& attr);

/// Mean |attribution| over windows and features, normalized to sum 1
/// (all-zero input stays zero).
std::vector<double> channel_importance(const AttributionMap& attr);

/// Mean |attribution| over windows and channels, normalized to sum 1.
std::vector<double> feature_importance(const AttributionMap& attr);

/// Mean |d logit / d edge mask| over samples and windows, symmetric, zero
/// diagonal, max-normalized to 1 unless all-zero.
Matrix edge_importance(const Model& model,
                       const std::vector<const DynamicGraphSequence*>& samples);

struct RankedEdge {
  int i = 0, j = 0;
  std::string label;  // later channel first: "Cz-Fz"
  double importance = 0.0;
};

/// Top k edges by descending importance; ties resolved by label.
std::vector<RankedEdge> top_connections(const Matrix& importance, int k,
                                        const std::vector<std::string>& names);

}  // namespace eegraph
