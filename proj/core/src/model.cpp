#include "eegraph/model.hpp"

#include <cmath>

#include "eegraph/error.hpp"

namespace eegraph {

Matrix& ParamStore::add(const std::string& name, int rows, int cols, double init_limit) {
  if (index_.count(name))
    throw Error(Errc::internal, "duplicate parameter name: " + name);
  index_[name] = static_cast<int>(values_.size());
  names_.push_back(name);
  init_limits_.push_back(init_limit);
  values_.push_back(Matrix::zeros(rows, cols));
  return values_.back();
}

int ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

const Matrix& ParamStore::at(const std::string& name) const {
  const int i = find(name);
  if (i < 0) throw Error(Errc::internal, "unknown parameter: " + name);
  return values_[static_cast<size_t>(i)];
}

Matrix& ParamStore::at(const std::string& name) {
  const int i = find(name);
  if (i < 0) throw Error(Errc::internal, "unknown parameter: " + name);
  return values_[static_cast<size_t>(i)];
}

size_t ParamStore::scalar_count() const {
  size_t n = 0;
  for (const Matrix& m : values_) n += m.v.size();
  return n;
}

namespace {

double glorot_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

Model::Model(const ModelConfig& cfg) : cfg_(cfg) {
  const int H = cfg.gat_hidden;
  const int heads = cfg.gat_heads;
  int in_dim = cfg.node_feature_dim;
  for (int layer = 0; layer < 2; ++layer) {
    const std::string pre = "gat" + std::to_string(layer + 1);
    GatIdx gi;
    params_.add(pre + ".W", in_dim, H, glorot_limit(in_dim, H));
    gi.W = params_.find(pre + ".W");
    for (int h = 0; h < heads; ++h) {
      // Both halves of one attention vector of length 2H mapping to a scalar.
      const double lim = glorot_limit(2 * H, 1);
      const std::string hp = pre + ".h" + std::to_string(h);
      params_.add(hp + ".a_dst", H, 1, lim);
      params_.add(hp + ".a_src", H, 1, lim);
      gi.a_dst.push_back(params_.find(hp + ".a_dst"));
      gi.a_src.push_back(params_.find(hp + ".a_src"));
    }
    gat_.push_back(gi);
    in_dim = heads * H;
  }

  if (!cfg.spatial_only) {
    const int hid = cfg.gru_hidden;
    for (const char* dir : {"fwd", "bwd"}) {
      for (int l = 0; l < cfg.gru_layers; ++l) {
        const int x_dim = l == 0 ? cfg.gat_out_dim() : 2 * hid;
        const int cat = hid + x_dim;
        const std::string pre = std::string("gru_") + dir + std::to_string(l + 1);
        GruIdx gi;
        params_.add(pre + ".Wz", cat, hid, glorot_limit(cat, hid));
        params_.add(pre + ".bz", 1, hid, 0.0);
        params_.add(pre + ".Wr", cat, hid, glorot_limit(cat, hid));
        params_.add(pre + ".br", 1, hid, 0.0);
        params_.add(pre + ".Wc", cat, hid, glorot_limit(cat, hid));
        params_.add(pre + ".bc", 1, hid, 0.0);
        gi.Wz = params_.find(pre + ".Wz");
        gi.bz = params_.find(pre + ".bz");
        gi.Wr = params_.find(pre + ".Wr");
        gi.br = params_.find(pre + ".br");
        gi.Wc = params_.find(pre + ".Wc");
        gi.bc = params_.find(pre + ".bc");
        (std::string(dir) == "fwd" ? gru_fwd_ : gru_bwd_).push_back(gi);
      }
    }
  }

  const int mi = cfg.mlp_in_dim();
  params_.add("mlp.W1", mi, cfg.mlp_hidden, glorot_limit(mi, cfg.mlp_hidden));
  params_.add("mlp.b1", 1, cfg.mlp_hidden, 0.0);
  params_.add("mlp.W2", cfg.mlp_hidden, 1, glorot_limit(cfg.mlp_hidden, 1));
  params_.add("mlp.b2", 1, 1, 0.0);
  mlp_W1_ = params_.find("mlp.W1");
  mlp_b1_ = params_.find("mlp.b1");
  mlp_W2_ = params_.find("mlp.W2");
  mlp_b2_ = params_.find("mlp.b2");
}

Model Model::init(const ModelConfig& cfg, std::uint64_t seed) {
  Model m(cfg);
  Rng rng(seed);
  for (size_t i = 0; i < m.params_.tensor_count(); ++i) {
    const double lim = m.params_.init_limit(i);
    if (lim <= 0.0) continue;  // biases stay zero
    for (double& x : m.params_.value(i).v) x = (2.0 * rng.uniform() - 1.0) * lim;
  }
  return m;
}

std::vector<Var> Model::lift_params(Tape& t, bool requires_grad) const {
  std::vector<Var> out;
  out.reserve(params_.tensor_count());
  for (size_t i = 0; i < params_.tensor_count(); ++i)
    out.push_back(t.leaf(params_.value(i), requires_grad));
  return out;
}

Var Model::gat_layer(Tape& t, const std::vector<Var>& p, Var h, const EdgeList* edges,
                     int layer, int window, Var directed_mask, bool train, Rng* rng,
                     ForwardTrace* trace) const {
  const GatIdx& gi = gat_[static_cast<size_t>(layer)];
  Var Wh = t.matmul(h, p[static_cast<size_t>(gi.W)]);
  std::vector<Var> heads;
  for (size_t hd = 0; hd < gi.a_dst.size(); ++hd) {
    Var s_dst = t.matmul(Wh, p[static_cast<size_t>(gi.a_dst[hd])]);
    Var s_src = t.matmul(Wh, p[static_cast<size_t>(gi.a_src[hd])]);
    Var e = t.leaky_relu(t.edge_score(s_dst, s_src, edges), cfg_.leaky_slope);
    Var alpha = t.segment_softmax(e, edges);
    if (trace) {
      trace->attention.push_back(
          {window, layer, static_cast<int>(hd), t.value(alpha)});
    }
    if (directed_mask.valid()) alpha = t.mul(alpha, directed_mask);
    heads.push_back(t.elu(t.edge_weighted_sum(alpha, Wh, edges)));
  }
  Var out = cfg_.gat_heads == 1 ? heads[0] : t.concat_cols(heads);
  if (train) out = t.dropout(out, cfg_.dropout_backbone, *rng, true);
  return out;
}

Var Model::forward(Tape& t, const std::vector<Var>& p, const ModelInputs& in,
                   bool train, Rng* dropout_rng, ForwardTrace* trace) const {
  if (in.features.empty() || in.edges == nullptr || in.edges->size() != in.features.size())
    throw Error(Errc::shape_mismatch, "forward: feature/edge window counts disagree");
  if (!in.edge_masks.empty() && in.edge_masks.size() != in.features.size())
    throw Error(Errc::shape_mismatch, "forward: edge mask count disagrees");
  if (train && dropout_rng == nullptr)
    throw Error(Errc::internal, "forward: train mode needs an rng");

  const size_t T = in.features.size();
  std::vector<Var> emb(T);
  for (size_t w = 0; w < T; ++w) {
    const EdgeList* edges = &(*in.edges)[w];
    Var feat = in.features[w];
    const Matrix& fv = t.value(feat);
    if (fv.rows != edges->n_nodes || fv.cols != cfg_.node_feature_dim)
      throw Error(Errc::shape_mismatch, "forward: node feature shape disagrees");
    Var mask;
    if (!in.edge_masks.empty())
      mask = t.gather_values(in.edge_masks[w], edges->undirected_index);
    Var h = feat;
    for (int layer = 0; layer < 2; ++layer)
      h = gat_layer(t, p, h, edges, layer, static_cast<int>(w), mask, train, dropout_rng, trace);
    emb[w] = t.mean_rows(h);
  }

  Var head_in;
  if (cfg_.spatial_only) {
    Var acc = emb[0];
    for (size_t w = 1; w < T; ++w) acc = t.add(acc, emb[w]);
    head_in = t.affine(acc, 1.0 / static_cast<double>(T), 0.0);
  } else {
    std::vector<Var> layer_in = emb;
    Var final_fwd, final_bwd;
    for (int l = 0; l < cfg_.gru_layers; ++l) {
      const GruIdx& pf = gru_fwd_[static_cast<size_t>(l)];
      const GruIdx& pb = gru_bwd_[static_cast<size_t>(l)];
      Var hf = t.leaf(Matrix::zeros(1, cfg_.gru_hidden), false);
      Var hb = t.leaf(Matrix::zeros(1, cfg_.gru_hidden), false);
      std::vector<Var> fwd(T), bwd(T);
      for (size_t w = 0; w < T; ++w) {
        hf = gru_step(t, layer_in[w], hf, p[static_cast<size_t>(pf.Wz)], p[static_cast<size_t>(pf.bz)],
                      p[static_cast<size_t>(pf.Wr)], p[static_cast<size_t>(pf.br)],
                      p[static_cast<size_t>(pf.Wc)], p[static_cast<size_t>(pf.bc)]);
        fwd[w] = hf;
      }
      for (size_t w = T; w-- > 0;) {
        hb = gru_step(t, layer_in[w], hb, p[static_cast<size_t>(pb.Wz)], p[static_cast<size_t>(pb.bz)],
                      p[static_cast<size_t>(pb.Wr)], p[static_cast<size_t>(pb.br)],
                      p[static_cast<size_t>(pb.Wc)], p[static_cast<size_t>(pb.bc)]);
        bwd[w] = hb;
      }
      final_fwd = fwd[T - 1];
      final_bwd = bwd[0];
      if (l + 1 < cfg_.gru_layers) {
        std::vector<Var> next(T);
        for (size_t w = 0; w < T; ++w) {
          Var cat = t.concat_cols({fwd[w], bwd[w]});
          next[w] = train ? t.dropout(cat, cfg_.dropout_backbone, *dropout_rng, true) : cat;
        }
        layer_in = std::move(next);
      }
    }
    head_in = t.concat_cols({final_fwd, final_bwd});
  }

  Var h1 = t.elu(t.add_rowvec(t.matmul(head_in, p[static_cast<size_t>(mlp_W1_)]),
                              p[static_cast<size_t>(mlp_b1_)]));
  if (train) h1 = t.dropout(h1, cfg_.dropout_head, *dropout_rng, true);
  return t.add_rowvec(t.matmul(h1, p[static_cast<size_t>(mlp_W2_)]),
                      p[static_cast<size_t>(mlp_b2_)]);
}

double Model::eval_logit(const DynamicGraphSequence& seq) const {
  Tape t;
  auto edges = edge_lists_for(seq);
  ModelInputs in;
  in.edges = &edges;
  for (const GraphSnapshot& s : seq.snapshots)
    in.features.push_back(t.leaf(s.node_features, false));
  auto p = lift_params(t, false);
  return t.scalar(forward(t, p, in, false, nullptr, nullptr));
}

std::vector<EdgeList> Model::edge_lists_for(const DynamicGraphSequence& seq) {
  std::vector<EdgeList> out;
  out.reserve(seq.snapshots.size());
  for (const GraphSnapshot& s : seq.snapshots)
    out.push_back(EdgeList::from_topology(s.topology, true));
  return out;
}

Var gru_step(Tape& t, Var x, Var h_prev, Var Wz, Var bz, Var Wr, Var br,
             Var Wc, Var bc) {
  Var hx = t.concat_cols({h_prev, x});
  Var z = t.sigmoid(t.add_rowvec(t.matmul(hx, Wz), bz));
  Var r = t.sigmoid(t.add_rowvec(t.matmul(hx, Wr), br));
  Var rhx = t.concat_cols({t.mul(r, h_prev), x});
  Var cand = t.tanh_op(t.add_rowvec(t.matmul(rhx, Wc), bc));
  Var keep = t.mul(t.affine(z, -1.0, 1.0), h_prev);
  return t.add(keep, t.mul(z, cand));
}

Matrix gru_step_value(const Matrix& x, const Matrix& h_prev, const Matrix& Wz,
                      const Matrix& bz, const Matrix& Wr, const Matrix& br,
                      const Matrix& Wc, const Matrix& bc) {
  Tape t;
  Var h = gru_step(t, t.leaf(x, false), t.leaf(h_prev, false), t.leaf(Wz, false),
                   t.leaf(bz, false), t.leaf(Wr, false), t.leaf(br, false),
                   t.leaf(Wc, false), t.leaf(bc, false));
  return t.value(h);
}

Matrix gat_layer_value(const Matrix& nodes, const GraphTopology& topo,
                       const Matrix& W, const std::vector<Matrix>& a_dst,
                       const std::vector<Matrix>& a_src, double leaky_slope,
                       std::vector<Matrix>* attention, EdgeList* edges_out) {
  EdgeList edges = EdgeList::from_topology(topo, true);
  Tape t;
  Var h = t.leaf(nodes, false);
  Var Wh = t.matmul(h, t.leaf(W, false));
  std::vector<Var> heads;
  for (size_t hd = 0; hd < a_dst.size(); ++hd) {
    Var s_dst = t.matmul(Wh, t.leaf(a_dst[hd], false));
    Var s_src = t.matmul(Wh, t.leaf(a_src[hd], false));
    Var e = t.leaky_relu(t.edge_score(s_dst, s_src, &edges), leaky_slope);
    Var alpha = t.segment_softmax(e, &edges);
    if (attention) attention->push_back(t.value(alpha));
    heads.push_back(t.elu(t.edge_weighted_sum(alpha, Wh, &edges)));
  }
  Var out = heads.size() == 1 ? heads[0] : t.concat_cols(heads);
  Matrix result = t.value(out);
  if (edges_out) *edges_out = std::move(edges);
  return result;
}

}  // namespace eegraph
