#include "eegraph/explain.hpp"

#include <algorithm>
#include <cmath>

#include "eegraph/error.hpp"

namespace eegraph {

AttributionMap integrated_gradients(const Model& model, const DynamicGraphSequence& seq,
                                    int steps) {
  if (steps < 1) throw Error(Errc::invalid_spec, "integrated_gradients: steps must be >= 1");
  if (seq.snapshots.empty())
    throw Error(Errc::invalid_spec, "integrated_gradients: empty sequence");

  const auto edges = Model::edge_lists_for(seq);
  const size_t T = seq.snapshots.size();
  AttributionMap attr;
  attr.steps = steps;
  std::vector<Matrix> grad_sum;
  for (const GraphSnapshot& s : seq.snapshots)
    grad_sum.push_back(Matrix::zeros(s.node_features.rows, s.node_features.cols));

  for (int k = 1; k <= steps; ++k) {
    const double alpha = (static_cast<double>(k) - 0.5) / static_cast<double>(steps);
    Tape t;
    ModelInputs in;
    in.edges = &edges;
    for (const GraphSnapshot& s : seq.snapshots) {
      Matrix scaled = s.node_features;
      for (double& x : scaled.v) x *= alpha;  // baseline is all-zero
      in.features.push_back(t.leaf(std::move(scaled), true));
    }
    auto p = model.lift_params(t, false);
    Var logit = model.forward(t, p, in, false, nullptr, nullptr);
    t.backward(logit);
    for (size_t w = 0; w < T; ++w) {
      const Matrix& g = t.grad(in.features[w]);
      for (size_t i = 0; i < g.v.size(); ++i) grad_sum[w].v[i] += g.v[i];
    }
  }

  for (size_t w = 0; w < T; ++w) {
    Matrix a = seq.snapshots[w].node_features;
    for (size_t i = 0; i < a.v.size(); ++i)
      a.v[i] *= grad_sum[w].v[i] / static_cast<double>(steps);
    attr.windows.push_back(std::move(a));
  }
  return attr;
}

IgCompleteness ig_completeness(const Model& model, const DynamicGraphSequence& seq,
                               const AttributionMap& attr) {
  IgCompleteness c;
  for (const Matrix& w : attr.windows)
    for (double v : w.v) c.attribution_sum += v;
  c.model_at_input = model.eval_logit(seq);
  DynamicGraphSequence zero = seq;
  for (GraphSnapshot& s : zero.snapshots)
    s.node_features = Matrix::zeros(s.node_features.rows, s.node_features.cols);
  c.model_at_baseline = model.eval_logit(zero);
  const double gap = c.model_at_input - c.model_at_baseline;
  c.relative_error = gap == 0.0 ? std::abs(c.attribution_sum)
                                : std::abs(c.attribution_sum - gap) / std::abs(gap);
  return c;
}

namespace {

std::vector<double> importance_over_axis(const AttributionMap& attr, bool by_row) {
  if (attr.windows.empty()) return {};
  const int rows = attr.windows[0].rows;
  const int cols = attr.windows[0].cols;
  std::vector<double> out(static_cast<size_t>(by_row ? rows : cols), 0.0);
  for (const Matrix& w : attr.windows)
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        out[static_cast<size_t>(by_row ? r : c)] += std::abs(w(r, c));
  double total = 0.0;
  for (double v : out) total += v;
  if (total > 0.0)
    for (double& v : out) v /= total;
  return out;
}

}  // namespace

std::vector<double> channel_importance(const AttributionMap& attr) {
  return importance_over_axis(attr, true);
}

std::vector<double> feature_importance(const AttributionMap& attr) {
  return importance_over_axis(attr, false);
}

Matrix edge_importance(const Model& model,
                       const std::vector<const DynamicGraphSequence*>& samples) {
  if (samples.empty())
    throw Error(Errc::invalid_spec, "edge_importance: no samples");
  const int n = samples[0]->snapshots.empty()
                    ? 0
                    : samples[0]->snapshots[0].topology.n_nodes;
  Matrix accum = Matrix::zeros(n, n);
  long long total_windows = 0;

  for (const DynamicGraphSequence* seq : samples) {
    const auto edges = Model::edge_lists_for(*seq);
    Tape t;
    ModelInputs in;
    in.edges = &edges;
    for (const GraphSnapshot& s : seq->snapshots) {
      in.features.push_back(t.leaf(s.node_features, false));
      Matrix ones(1, static_cast<int>(s.topology.edges.size()));
      for (double& x : ones.v) x = 1.0;
      in.edge_masks.push_back(t.leaf(std::move(ones), true));
    }
    auto p = model.lift_params(t, false);
    Var logit = model.forward(t, p, in, false, nullptr, nullptr);
    t.backward(logit);
    for (size_t w = 0; w < seq->snapshots.size(); ++w) {
      const GraphTopology& topo = seq->snapshots[w].topology;
      const Matrix& g = t.grad(in.edge_masks[w]);
      for (size_t e = 0; e < topo.edges.size(); ++e) {
        const auto [i, j] = topo.edges[e];
        const double v = std::abs(g.v[e]);
        accum(i, j) += v;
        accum(j, i) += v;
      }
      ++total_windows;
    }
  }

  if (total_windows > 0)
    for (double& v : accum.v) v /= static_cast<double>(total_windows);
  double mx = 0.0;
  for (double v : accum.v) mx = std::max(mx, v);
  if (mx > 0.0)
    for (double& v : accum.v) v /= mx;
  return accum;
}

std::vector<RankedEdge> top_connections(const Matrix& importance, int k,
                                        const std::vector<std::string>& names) {
  const int n = importance.rows;
  const int n_pairs = n * (n - 1) / 2;
  if (k < 0 || k > n_pairs)
    throw Error(Errc::invalid_spec, "top_connections: k outside [0, pairs]");
  std::vector<RankedEdge> edges;
  edges.reserve(static_cast<size_t>(n_pairs));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      RankedEdge e;
      e.i = i;
      e.j = j;
      // Montage-order labels put the later channel first ("Fz-Fp2").
      e.label = names.at(static_cast<size_t>(j)) + "-" + names.at(static_cast<size_t>(i));
      e.importance = importance(i, j);
      edges.push_back(std::move(e));
    }
  }
  std::sort(edges.begin(), edges.end(), [](const RankedEdge& a, const RankedEdge& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.label < b.label;
  });
  edges.resize(static_cast<size_t>(k));
  return edges;
}

}  // namespace eegraph
