#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eegraph/connectivity.hpp"
#include "eegraph/matrix.hpp"
#include "eegraph/rng.hpp"
#include "eegraph/tape.hpp"

namespace eegraph {

struct ModelConfig {
  int node_feature_dim = 9;
  int n_nodes = 19;
  int gat_heads = 2;
  int gat_hidden = 64;
  int gru_layers = 2;
  int gru_hidden = 128;
  int mlp_hidden = 64;
  double dropout_backbone = 0.182;
  double dropout_head = 0.5;
  double leaky_slope = 0.2;
  // Replaces the BiGRU with a mean over window embeddings.
  bool spatial_only = false;

  int gat_out_dim() const { return gat_heads * gat_hidden; }
  int mlp_in_dim() const { return spatial_only ? gat_out_dim() : 2 * gru_hidden; }
};

/// Ordered, named parameter tensors. Order is the init/update/serialize order.
class ParamStore {
 public:
  Matrix& add(const std::string& name, int rows, int cols, double init_limit);
  int find(const std::string& name) const;
  const Matrix& at(const std::string& name) const;
  Matrix& at(const std::string& name);

  size_t tensor_count() const { return values_.size(); }
  size_t scalar_count() const;
  const std::string& name(size_t i) const { return names_[i]; }
  const Matrix& value(size_t i) const { return values_[i]; }
  Matrix& value(size_t i) { return values_[i]; }
  double init_limit(size_t i) const { return init_limits_[i]; }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::vector<double> init_limits_;
  std::map<std::string, int> index_;
};

/// Per-forward diagnostic capture: post-softmax attention per window/layer/head.
struct AttentionRecord {
  int window = 0;
  int layer = 0;
  int head = 0;
  Matrix alpha;  // 1 x n_directed_edges
};

struct ForwardTrace {
  std::vector<AttentionRecord> attention;
};

/// Inputs for one sequence forward. Feature leaves and edge lists are owned
/// by the caller; edge_masks (optional, one 1 x n_undirected leaf per window)
/// scale post-softmax attention in both GAT layers.
struct ModelInputs {
  std::vector<Var> features;
  const std::vector<EdgeList>* edges = nullptr;
  std::vector<Var> edge_masks;
};

class Model {
 public:
  explicit Model(const ModelConfig& cfg);

  /// Glorot-uniform weights, zero biases, deterministic in seed.
  static Model init(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  size_t parameter_count() const { return params_.scalar_count(); }

  /// Registers every parameter as a tape leaf, in store order.
  std::vector<Var> lift_params(Tape& t, bool requires_grad) const;

  /// Builds the full forward program on the tape and returns the 1x1 logit.
  Var forward(Tape& t, const std::vector<Var>& p, const ModelInputs& in,
              bool train, Rng* dropout_rng, ForwardTrace* trace = nullptr) const;

  /// Convenience eval-mode forward on one sequence.
  double eval_logit(const DynamicGraphSequence& seq) const;

  static std::vector<EdgeList> edge_lists_for(const DynamicGraphSequence& seq);

 private:
  Var gat_layer(Tape& t, const std::vector<Var>& p, Var h, const EdgeList* edges,
                int layer, int window, Var directed_mask, bool train, Rng* rng,
                ForwardTrace* trace) const;

  ModelConfig cfg_;
  ParamStore params_;
  // Store indices resolved at construction, in forward order.
  struct GatIdx {
    int W;
    std::vector<int> a_dst, a_src;
  };
  struct GruIdx {
    int Wz, bz, Wr, br, Wc, bc;
  };
  std::vector<GatIdx> gat_;
  std::vector<GruIdx> gru_fwd_, gru_bwd_;
  int mlp_W1_, mlp_b1_, mlp_W2_, mlp_b2_;
};

/// One GRU step per the update/reset/candidate gating with inputs
/// concatenated as [h_prev, x]; returns h_t.
Var gru_step(Tape& t, Var x, Var h_prev, Var Wz, Var bz, Var Wr, Var br,
             Var Wc, Var bc);

/// Standalone value-level GRU step for small oracles.
Matrix gru_step_value(const Matrix& x, const Matrix& h_prev, const Matrix& Wz,
                      const Matrix& bz, const Matrix& Wr, const Matrix& br,
                      const Matrix& Wc, const Matrix& bc);

/// Standalone value-level single GAT layer (self-loops added internally).
/// a_dst/a_src hold one column vector per head. If attention is non-null it
/// receives one 1 x n_directed matrix per head.
Matrix gat_layer_value(const Matrix& nodes, const GraphTopology& topo,
                       const Matrix& W, const std::vector<Matrix>& a_dst,
                       const std::vector<Matrix>& a_src, double leaky_slope,
                       std::vector<Matrix>* attention = nullptr,
                       EdgeList* edges_out = nullptr);

}  // namespace eegraph
