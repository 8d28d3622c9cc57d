#include "eegraph/tape.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace eegraph {

EdgeList EdgeList::from_topology(const GraphTopology& topo, bool add_self_loops) {
  const int n = topo.n_nodes;
  // Neighbor sets per destination, with the undirected edge index carried
  // along so masks can address topology edges.
  std::vector<std::vector<std::pair<int, int>>> nbrs(static_cast<size_t>(n));
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    const auto [i, j] = topo.edges[e];
    nbrs[static_cast<size_t>(i)].push_back({j, static_cast<int>(e)});
    nbrs[static_cast<size_t>(j)].push_back({i, static_cast<int>(e)});
  }
  if (add_self_loops) {
    for (int i = 0; i < n; ++i) nbrs[static_cast<size_t>(i)].push_back({i, -1});
  }
  EdgeList out;
  out.n_nodes = n;
  out.seg_offsets.assign(static_cast<size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& list = nbrs[static_cast<size_t>(i)];
    std::sort(list.begin(), list.end());
    for (const auto& [j, ue] : list) {
      out.dst.push_back(i);
      out.src.push_back(j);
      out.undirected_index.push_back(ue);
    }
    out.seg_offsets[static_cast<size_t>(i) + 1] = static_cast<int>(out.dst.size());
  }
  return out;
}

namespace {

void check_finite_forward(const Matrix& m) {
#ifndef NDEBUG
  for (double x : m.v) assert(std::isfinite(x));
#else
  (void)m;
#endif
}

}  // namespace

Var Tape::push(Node n) {
  check_finite_forward(n.val);
  if (n.requires_grad) n.grd = Matrix::zeros(n.val.rows, n.val.cols);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  Node n;
  n.op = Op::kLeaf;
  n.val = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Var Tape::scalar_leaf(double value, bool requires_grad) {
  Matrix m(1, 1);
  m.v[0] = value;
  return leaf(std::move(m), requires_grad);
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.cols != B.rows)
    throw Error(Errc::shape_mismatch, "matmul: inner dimensions disagree");
  Node n;
  n.op = Op::kMatMul;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = wants_grad(a) || wants_grad(b);
  Matrix C = Matrix::zeros(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    const double* arow = A.row_ptr(i);
    double* crow = C.row_ptr(i);
    for (int k = 0; k < A.cols; ++k) {
      const double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = B.row_ptr(k);
      for (int j = 0; j < B.cols; ++j) crow[j] += av * brow[j];
    }
  }
  n.val = std::move(C);
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.rows != B.rows || A.cols != B.cols)
    throw Error(Errc::shape_mismatch, "add: shapes disagree");
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = wants_grad(a) || wants_grad(b);
  n.val = A;
  for (size_t i = 0; i < n.val.v.size(); ++i) n.val.v[i] += B.v[i];
  return push(std::move(n));
}

Var Tape::add_rowvec(Var a, Var row) {
  const Matrix& A = value(a);
  const Matrix& R = value(row);
  if (R.rows != 1 || R.cols != A.cols)
    throw Error(Errc::shape_mismatch, "add_rowvec: bias shape disagrees");
  Node n;
  n.op = Op::kAddRowVec;
  n.a = a.id;
  n.b = row.id;
  n.requires_grad = wants_grad(a) || wants_grad(row);
  n.val = A;
  for (int i = 0; i < A.rows; ++i) {
    double* out = n.val.row_ptr(i);
    for (int j = 0; j < A.cols; ++j) out[j] += R.v[static_cast<size_t>(j)];
  }
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.rows != B.rows || A.cols != B.cols)
    throw Error(Errc::shape_mismatch, "mul: shapes disagree");
  Node n;
  n.op = Op::kMul;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = wants_grad(a) || wants_grad(b);
  n.val = A;
  for (size_t i = 0; i < n.val.v.size(); ++i) n.val.v[i] *= B.v[i];
  return push(std::move(n));
}

Var Tape::affine(Var a, double scale, double shift) {
  Node n;
  n.op = Op::kAffine;
  n.a = a.id;
  n.s0 = scale;
  n.s1 = shift;
  n.requires_grad = wants_grad(a);
  n.val = value(a);
  for (double& x : n.val.v) x = scale * x + shift;
  return push(std::move(n));
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(Errc::invalid_spec, "concat_cols: no inputs");
  const int rows = value(parts[0]).rows;
  int cols = 0;
  bool req = false;
  for (Var p : parts) {
    if (value(p).rows != rows)
      throw Error(Errc::shape_mismatch, "concat_cols: row counts disagree");
    cols += value(p).cols;
    req = req || wants_grad(p);
  }
  Node n;
  n.op = Op::kConcatCols;
  n.requires_grad = req;
  for (Var p : parts) n.inputs.push_back(p.id);
  Matrix out(rows, cols);
  int at = 0;
  for (Var p : parts) {
    const Matrix& P = value(p);
    for (int i = 0; i < rows; ++i)
      std::copy(P.row_ptr(i), P.row_ptr(i) + P.cols, out.row_ptr(i) + at);
    at += P.cols;
  }
  n.val = std::move(out);
  return push(std::move(n));
}

Var Tape::mean_rows(Var a) {
  const Matrix& A = value(a);
  Node n;
  n.op = Op::kMeanRows;
  n.a = a.id;
  n.requires_grad = wants_grad(a);
  Matrix out = Matrix::zeros(1, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) out.v[static_cast<size_t>(j)] += A(i, j);
  for (double& x : out.v) x /= static_cast<double>(A.rows);
  n.val = std::move(out);
  return push(std::move(n));
}

Var Tape::sum_all(Var a) {
  Node n;
  n.op = Op::kSumAll;
  n.a = a.id;
  n.requires_grad = wants_grad(a);
  double s = 0.0;
  for (double x : value(a).v) s += x;
  Matrix out(1, 1);
  out.v[0] = s;
  n.val = std::move(out);
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a.id;
  n.requires_grad = wants_grad(a);
  n.val = value(a);
  for (double& x : n.val.v) {
    x = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                 : std::exp(x) / (1.0 + std::exp(x));
  }
  return push(std::move(n));
}

Var Tape::tanh_op(Var a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a.id;
  n.requires_grad = wants_grad(a);
  n.val = value(a);
  for (double& x : n.val.v) x = std::tanh(x);
  return push(std::move(n));
}

Var Tape::elu(Var a) {
  Node n;
  n.op = Op::kElu;
  n.a = a.id;
  n.requires_grad = wants_grad(a);
  n.val = value(a);
  for (double& x : n.val.v) x = x > 0.0 ? x : std::expm1(x);
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a.id;
  n.requires_grad = wants_grad(a);
  n.val = value(a);
  for (double& x : n.val.v) x = x > 0.0 ? x : 0.0;
  return push(std::move(n));
}

Var Tape::leaky_relu(Var a, double negative_slope) {
  Node n;
  n.op = Op::kLeakyRelu;
  n.a = a.id;
  n.s0 = negative_slope;
  n.requires_grad = wants_grad(a);
  n.val = value(a);
  for (double& x : n.val.v) x = x > 0.0 ? x : negative_slope * x;
  return push(std::move(n));
}

Var Tape::dropout(Var a, double rate, Rng& rng, bool train) {
  if (rate < 0.0 || rate >= 1.0)
    throw Error(Errc::invalid_spec, "dropout: rate must be in [0, 1)");
  if (!train || rate == 0.0) return a;
  Node n;
  n.op = Op::kDropout;
  n.a = a.id;
  n.requires_grad = wants_grad(a);
  n.val = value(a);
  n.aux.resize(n.val.v.size());
  const double keep = 1.0 - rate;
  for (size_t i = 0; i < n.val.v.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : 1.0 / keep;
    n.aux[i] = m;
    n.val.v[i] *= m;
  }
  return push(std::move(n));
}

Var Tape::edge_score(Var s_dst, Var s_src, const EdgeList* edges) {
  const Matrix& D = value(s_dst);
  const Matrix& S = value(s_src);
  if (D.cols != 1 || S.cols != 1 || D.rows != edges->n_nodes || S.rows != edges->n_nodes)
    throw Error(Errc::shape_mismatch, "edge_score: expected n_nodes x 1 score columns");
  Node n;
  n.op = Op::kEdgeScore;
  n.a = s_dst.id;
  n.b = s_src.id;
  n.edges = edges;
  n.requires_grad = wants_grad(s_dst) || wants_grad(s_src);
  Matrix out(1, edges->size());
  for (int k = 0; k < edges->size(); ++k) {
    out.v[static_cast<size_t>(k)] = D.v[static_cast<size_t>(edges->dst[static_cast<size_t>(k)])] +
                                    S.v[static_cast<size_t>(edges->src[static_cast<size_t>(k)])];
  }
  n.val = std::move(out);
  return push(std::move(n));
}

Var Tape::segment_softmax(Var e, const EdgeList* edges) {
  const Matrix& E = value(e);
  if (E.rows != 1 || E.cols != edges->size())
    throw Error(Errc::shape_mismatch, "segment_softmax: expected 1 x n_edges scores");
  Node n;
  n.op = Op::kSegmentSoftmax;
  n.a = e.id;
  n.edges = edges;
  n.requires_grad = wants_grad(e);
  Matrix out = E;
  for (int i = 0; i < edges->n_nodes; ++i) {
    const int lo = edges->seg_offsets[static_cast<size_t>(i)];
    const int hi = edges->seg_offsets[static_cast<size_t>(i) + 1];
    if (lo == hi) continue;
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = lo; k < hi; ++k) mx = std::max(mx, E.v[static_cast<size_t>(k)]);
    double denom = 0.0;
    for (int k = lo; k < hi; ++k) {
      const double w = std::exp(E.v[static_cast<size_t>(k)] - mx);
      out.v[static_cast<size_t>(k)] = w;
      denom += w;
    }
    for (int k = lo; k < hi; ++k) out.v[static_cast<size_t>(k)] /= denom;
  }
  n.val = std::move(out);
  return push(std::move(n));
}

Var Tape::edge_weighted_sum(Var alpha, Var rows, const EdgeList* edges) {
  const Matrix& A = value(alpha);
  const Matrix& H = value(rows);
  if (A.rows != 1 || A.cols != edges->size() || H.rows != edges->n_nodes)
    throw Error(Errc::shape_mismatch, "edge_weighted_sum: shapes disagree with edge list");
  Node n;
  n.op = Op::kEdgeWeightedSum;
  n.a = alpha.id;
  n.b = rows.id;
  n.edges = edges;
  n.requires_grad = wants_grad(alpha) || wants_grad(rows);
  Matrix out = Matrix::zeros(edges->n_nodes, H.cols);
  for (int k = 0; k < edges->size(); ++k) {
    const double w = A.v[static_cast<size_t>(k)];
    if (w == 0.0) continue;
    const double* hrow = H.row_ptr(edges->src[static_cast<size_t>(k)]);
    double* orow = out.row_ptr(edges->dst[static_cast<size_t>(k)]);
    for (int j = 0; j < H.cols; ++j) orow[j] += w * hrow[j];
  }
  n.val = std::move(out);
  return push(std::move(n));
}

Var Tape::gather_values(Var a, std::vector<int> idx) {
  const Matrix& A = value(a);
  if (A.rows != 1)
    throw Error(Errc::shape_mismatch, "gather_values: expected a row vector");
  Node n;
  n.op = Op::kGatherValues;
  n.a = a.id;
  n.requires_grad = wants_grad(a);
  Matrix out(1, static_cast<int>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= A.cols)
      throw Error(Errc::shape_mismatch, "gather_values: index out of range");
    out.v[k] = idx[k] < 0 ? 1.0 : A.v[static_cast<size_t>(idx[k])];
  }
  n.idx = std::move(idx);
  n.val = std::move(out);
  return push(std::move(n));
}

Var Tape::bce_with_logits(Var logit, double target) {
  const Matrix& L = value(logit);
  if (L.rows != 1 || L.cols != 1)
    throw Error(Errc::shape_mismatch, "bce_with_logits: expected a 1x1 logit");
  Node n;
  n.op = Op::kBceWithLogits;
  n.a = logit.id;
  n.s0 = target;
  n.requires_grad = wants_grad(logit);
  const double x = L.v[0];
  // max(x,0) - x*y + log(1 + exp(-|x|))
  const double loss = std::max(x, 0.0) - x * target + std::log1p(std::exp(-std::abs(x)));
  Matrix out(1, 1);
  out.v[0] = loss;
  n.val = std::move(out);
  return push(std::move(n));
}

Var Tape::bce_with_logits_mean(Var logits, const std::vector<double>& targets) {
  const Matrix& L = value(logits);
  if (L.cols != 1 || static_cast<size_t>(L.rows) != targets.size())
    throw Error(Errc::shape_mismatch, "bce_with_logits_mean: expected n x 1 logits with n targets");
  Node n;
  n.op = Op::kBceMean;
  n.a = logits.id;
  n.aux = targets;
  n.requires_grad = wants_grad(logits);
  double loss = 0.0;
  for (size_t i = 0; i < targets.size(); ++i) {
    const double x = L.v[i];
    loss += std::max(x, 0.0) - x * targets[i] + std::log1p(std::exp(-std::abs(x)));
  }
  Matrix out(1, 1);
  out.v[0] = loss / static_cast<double>(targets.size());
  n.val = std::move(out);
  return push(std::move(n));
}

Var Tape::add_scalars(const std::vector<Var>& xs) {
  if (xs.empty()) throw Error(Errc::invalid_spec, "add_scalars: no inputs");
  Var acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
  return acc;
}

void Tape::backward(Var loss) {
  Node& top = node(loss);
  if (top.val.rows != 1 || top.val.cols != 1)
    throw Error(Errc::shape_mismatch, "backward: root must be a scalar");
  if (!top.requires_grad) return;
  top.grd.v[0] = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.requires_grad) continue;
    const Matrix& g = n.grd;
    auto gin = [&](int input) -> Matrix* {
      if (input < 0) return nullptr;
      Node& in = nodes_[static_cast<size_t>(input)];
      return in.requires_grad ? &in.grd : nullptr;
    };
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul: {
        const Matrix& A = nodes_[static_cast<size_t>(n.a)].val;
        const Matrix& B = nodes_[static_cast<size_t>(n.b)].val;
        if (Matrix* ga = gin(n.a)) {
          // ga += g * B^T
          for (int i = 0; i < A.rows; ++i) {
            const double* grow = g.row_ptr(i);
            double* garow = ga->row_ptr(i);
            for (int k = 0; k < B.rows; ++k) {
              const double* brow = B.row_ptr(k);
              double s = 0.0;
              for (int j = 0; j < B.cols; ++j) s += grow[j] * brow[j];
              garow[k] += s;
            }
          }
        }
        if (Matrix* gb = gin(n.b)) {
          // gb += A^T * g
          for (int i = 0; i < A.rows; ++i) {
            const double* arow = A.row_ptr(i);
            const double* grow = g.row_ptr(i);
            for (int k = 0; k < A.cols; ++k) {
              const double av = arow[k];
              if (av == 0.0) continue;
              double* gbrow = gb->row_ptr(k);
              for (int j = 0; j < g.cols; ++j) gbrow[j] += av * grow[j];
            }
          }
        }
        break;
      }
      case Op::kAdd: {
        if (Matrix* ga = gin(n.a))
          for (size_t i = 0; i < g.v.size(); ++i) ga->v[i] += g.v[i];
        if (Matrix* gb = gin(n.b))
          for (size_t i = 0; i < g.v.size(); ++i) gb->v[i] += g.v[i];
        break;
      }
      case Op::kAddRowVec: {
        if (Matrix* ga = gin(n.a))
          for (size_t i = 0; i < g.v.size(); ++i) ga->v[i] += g.v[i];
        if (Matrix* gb = gin(n.b)) {
          for (int i = 0; i < g.rows; ++i) {
            const double* grow = g.row_ptr(i);
            for (int j = 0; j < g.cols; ++j) gb->v[static_cast<size_t>(j)] += grow[j];
          }
        }
        break;
      }
      case Op::kMul: {
        const Matrix& A = nodes_[static_cast<size_t>(n.a)].val;
        const Matrix& B = nodes_[static_cast<size_t>(n.b)].val;
        if (Matrix* ga = gin(n.a))
          for (size_t i = 0; i < g.v.size(); ++i) ga->v[i] += g.v[i] * B.v[i];
        if (Matrix* gb = gin(n.b))
          for (size_t i = 0; i < g.v.size(); ++i) gb->v[i] += g.v[i] * A.v[i];
        break;
      }
      case Op::kAffine: {
        if (Matrix* ga = gin(n.a))
          for (size_t i = 0; i < g.v.size(); ++i) ga->v[i] += n.s0 * g.v[i];
        break;
      }
      case Op::kConcatCols: {
        int at = 0;
        for (int input : n.inputs) {
          const Matrix& P = nodes_[static_cast<size_t>(input)].val;
          if (Matrix* gp = gin(input)) {
            for (int i = 0; i < g.rows; ++i) {
              const double* grow = g.row_ptr(i) + at;
              double* prow = gp->row_ptr(i);
              for (int j = 0; j < P.cols; ++j) prow[j] += grow[j];
            }
          }
          at += P.cols;
        }
        break;
      }
      case Op::kMeanRows: {
        if (Matrix* ga = gin(n.a)) {
          const double inv = 1.0 / static_cast<double>(ga->rows);
          for (int i = 0; i < ga->rows; ++i) {
            double* garow = ga->row_ptr(i);
            for (int j = 0; j < ga->cols; ++j) garow[j] += inv * g.v[static_cast<size_t>(j)];
          }
        }
        break;
      }
      case Op::kSumAll: {
        if (Matrix* ga = gin(n.a))
          for (double& x : ga->v) x += g.v[0];
        break;
      }
      case Op::kSigmoid: {
        if (Matrix* ga = gin(n.a))
          for (size_t i = 0; i < g.v.size(); ++i) {
            const double y = n.val.v[i];
            ga->v[i] += g.v[i] * y * (1.0 - y);
          }
        break;
      }
      case Op::kTanh: {
        if (Matrix* ga = gin(n.a))
          for (size_t i = 0; i < g.v.size(); ++i) {
            const double y = n.val.v[i];
            ga->v[i] += g.v[i] * (1.0 - y * y);
          }
        break;
      }
      case Op::kElu: {
        if (Matrix* ga = gin(n.a))
          for (size_t i = 0; i < g.v.size(); ++i) {
            const double y = n.val.v[i];
            ga->v[i] += g.v[i] * (y > 0.0 ? 1.0 : y + 1.0);
          }
        break;
      }
      case Op::kRelu: {
        if (Matrix* ga = gin(n.a)) {
          const Matrix& A = nodes_[static_cast<size_t>(n.a)].val;
          for (size_t i = 0; i < g.v.size(); ++i)
            ga->v[i] += g.v[i] * (A.v[i] > 0.0 ? 1.0 : 0.0);
        }
        break;
      }
      case Op::kLeakyRelu: {
        if (Matrix* ga = gin(n.a)) {
          const Matrix& A = nodes_[static_cast<size_t>(n.a)].val;
          for (size_t i = 0; i < g.v.size(); ++i)
            ga->v[i] += g.v[i] * (A.v[i] > 0.0 ? 1.0 : n.s0);
        }
        break;
      }
      case Op::kDropout: {
        if (Matrix* ga = gin(n.a))
          for (size_t i = 0; i < g.v.size(); ++i) ga->v[i] += g.v[i] * n.aux[i];
        break;
      }
      case Op::kEdgeScore: {
        const EdgeList* E = n.edges;
        Matrix* gd = gin(n.a);
        Matrix* gs = gin(n.b);
        for (int k = 0; k < E->size(); ++k) {
          const double gk = g.v[static_cast<size_t>(k)];
          if (gd) gd->v[static_cast<size_t>(E->dst[static_cast<size_t>(k)])] += gk;
          if (gs) gs->v[static_cast<size_t>(E->src[static_cast<size_t>(k)])] += gk;
        }
        break;
      }
      case Op::kSegmentSoftmax: {
        if (Matrix* ga = gin(n.a)) {
          const EdgeList* E = n.edges;
          for (int i = 0; i < E->n_nodes; ++i) {
            const int lo = E->seg_offsets[static_cast<size_t>(i)];
            const int hi = E->seg_offsets[static_cast<size_t>(i) + 1];
            double dot = 0.0;
            for (int k = lo; k < hi; ++k)
              dot += g.v[static_cast<size_t>(k)] * n.val.v[static_cast<size_t>(k)];
            for (int k = lo; k < hi; ++k) {
              const double y = n.val.v[static_cast<size_t>(k)];
              ga->v[static_cast<size_t>(k)] += y * (g.v[static_cast<size_t>(k)] - dot);
            }
          }
        }
        break;
      }
      case Op::kEdgeWeightedSum: {
        const EdgeList* E = n.edges;
        const Matrix& A = nodes_[static_cast<size_t>(n.a)].val;  // 1 x n_edges
        const Matrix& H = nodes_[static_cast<size_t>(n.b)].val;  // n_nodes x d
        Matrix* ga = gin(n.a);
        Matrix* gh = gin(n.b);
        for (int k = 0; k < E->size(); ++k) {
          const int s = E->src[static_cast<size_t>(k)];
          const int d = E->dst[static_cast<size_t>(k)];
          const double* grow = g.row_ptr(d);
          if (ga) {
            const double* hrow = H.row_ptr(s);
            double dot = 0.0;
            for (int j = 0; j < H.cols; ++j) dot += grow[j] * hrow[j];
            ga->v[static_cast<size_t>(k)] += dot;
          }
          if (gh) {
            const double w = A.v[static_cast<size_t>(k)];
            if (w != 0.0) {
              double* ghrow = gh->row_ptr(s);
              for (int j = 0; j < H.cols; ++j) ghrow[j] += w * grow[j];
            }
          }
        }
        break;
      }
      case Op::kGatherValues: {
        if (Matrix* ga = gin(n.a)) {
          for (size_t k = 0; k < n.idx.size(); ++k)
            if (n.idx[k] >= 0) ga->v[static_cast<size_t>(n.idx[k])] += g.v[k];
        }
        break;
      }
      case Op::kBceWithLogits: {
        if (Matrix* ga = gin(n.a)) {
          const double x = nodes_[static_cast<size_t>(n.a)].val.v[0];
          const double p = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                    : std::exp(x) / (1.0 + std::exp(x));
          ga->v[0] += g.v[0] * (p - n.s0);
        }
        break;
      }
      case Op::kBceMean: {
        if (Matrix* ga = gin(n.a)) {
          const Matrix& L = nodes_[static_cast<size_t>(n.a)].val;
          const double inv = 1.0 / static_cast<double>(n.aux.size());
          for (size_t i = 0; i < n.aux.size(); ++i) {
            const double x = L.v[i];
            const double p = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                      : std::exp(x) / (1.0 + std::exp(x));
            ga->v[i] += g.v[0] * inv * (p - n.aux[i]);
          }
        }
        break;
      }
    }
  }

  for (const Node& n : nodes_) {
    if (!n.requires_grad) continue;
    for (double x : n.grd.v) {
      if (!std::isfinite(x))
        throw Error(Errc::nan_gradient, "backward produced a non-finite gradient");
    }
  }
}

}  // namespace eegraph
