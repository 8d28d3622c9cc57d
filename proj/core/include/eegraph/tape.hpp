#pragma once

#include <vector>

#include "eegraph/connectivity.hpp"
#include "eegraph/error.hpp"
#include "eegraph/matrix.hpp"
#include "eegraph/rng.hpp"

namespace eegraph {

/// Handle into a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Directed message-passing edges grouped contiguously by destination node.
/// seg_offsets has n_nodes+1 entries; edges [seg_offsets[i], seg_offsets[i+1])
/// all point at node i.
struct EdgeList {
  int n_nodes = 0;
  std::vector<int> dst;
  std::vector<int> src;
  std::vector<int> seg_offsets;
  // Index of the undirected source edge for each directed edge, -1 for
  // self-loops. Used to tie mask variables to topology edges.
  std::vector<int> undirected_index;

  int size() const { return static_cast<int>(dst.size()); }

  static EdgeList from_topology(const GraphTopology& topo, bool add_self_loops = true);
};

/// Eager reverse-mode tape over row-major double matrices. Each op computes
/// its value on creation; backward() walks the recorded program in reverse.
class Tape {
 public:
  Var leaf(Matrix value, bool requires_grad = true);
  Var scalar_leaf(double value, bool requires_grad = false);

  const Matrix& value(Var v) const { return node(v).val; }
  const Matrix& grad(Var v) const { return node(v).grd; }
  double scalar(Var v) const { return node(v).val.v.at(0); }

  // Dense algebra.
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var add_rowvec(Var a, Var row);
  Var mul(Var a, Var b);
  Var affine(Var a, double scale, double shift);
  Var concat_cols(const std::vector<Var>& parts);
  Var mean_rows(Var a);
  Var sum_all(Var a);

  // Activations.
  Var sigmoid(Var a);
  Var tanh_op(Var a);
  Var elu(Var a);
  Var relu(Var a);
  Var leaky_relu(Var a, double negative_slope);

  /// Inverted dropout; identity when train is false.
  Var dropout(Var a, double rate, Rng& rng, bool train);

  // Graph attention plumbing. The EdgeList must outlive the tape.
  Var edge_score(Var s_dst, Var s_src, const EdgeList* edges);
  Var segment_softmax(Var e, const EdgeList* edges);
  Var edge_weighted_sum(Var alpha, Var rows, const EdgeList* edges);
  /// out[k] = idx[k] < 0 ? 1.0 : a[idx[k]]; backward scatter-adds.
  Var gather_values(Var a, std::vector<int> idx);

  /// Numerically stable binary cross-entropy on a 1x1 logit.
  Var bce_with_logits(Var logit, double target);

  /// Mean stable BCE over an n x 1 logit column with per-row targets.
  Var bce_with_logits_mean(Var logits, const std::vector<double>& targets);

  /// Sum of 1x1 scalars.
  Var add_scalars(const std::vector<Var>& xs);

  /// Seeds d(loss)=1 and accumulates gradients into every recorded node.
  /// Throws Error{nan_gradient} when a non-finite gradient appears.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kLeaf, kMatMul, kAdd, kAddRowVec, kMul, kAffine, kConcatCols, kMeanRows,
    kSumAll, kSigmoid, kTanh, kElu, kRelu, kLeakyRelu, kDropout, kEdgeScore,
    kSegmentSoftmax, kEdgeWeightedSum, kGatherValues, kBceWithLogits, kBceMean,
  };

  struct Node {
    Op op = Op::kLeaf;
    int a = -1, b = -1;
    std::vector<int> inputs;     // concat / add_scalars
    std::vector<int> idx;        // gather_values
    std::vector<double> aux;     // dropout keep mask
    const EdgeList* edges = nullptr;
    double s0 = 0.0, s1 = 0.0;   // op-specific scalars
    Matrix val;
    Matrix grd;
    bool requires_grad = false;
  };

  const Node& node(Var v) const { return nodes_.at(static_cast<size_t>(v.id)); }
  Node& node(Var v) { return nodes_.at(static_cast<size_t>(v.id)); }

  Var push(Node n);
  bool wants_grad(Var v) const { return node(v).requires_grad; }

  std::vector<Node> nodes_;
};

}  // namespace eegraph
