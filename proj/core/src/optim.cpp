#include "eegraph/optim.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "eegraph/error.hpp"

namespace eegraph {

double cosine_lr(int step, int total_steps, double base_lr) {
  if (total_steps <= 0 || step < 0 || step > total_steps)
    throw Error(Errc::invalid_spec, "cosine_lr: step outside [0, total_steps]");
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return 0.5 * base_lr * (1.0 + std::cos(M_PI * frac));
}

AdamW::AdamW(const OptimConfig& cfg, const ParamStore& params) : cfg_(cfg) {
  m_.reserve(params.tensor_count());
  v_.reserve(params.tensor_count());
  for (size_t i = 0; i < params.tensor_count(); ++i) {
    const Matrix& p = params.value(i);
    m_.push_back(Matrix::zeros(p.rows, p.cols));
    v_.push_back(Matrix::zeros(p.rows, p.cols));
  }
}

void AdamW::step(ParamStore& params, const std::vector<Matrix>& grads, double lr_t) {
  if (grads.size() != params.tensor_count())
    throw Error(Errc::shape_mismatch, "adamw: gradient list length disagrees");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (size_t i = 0; i < params.tensor_count(); ++i) {
    Matrix& p = params.value(i);
    const Matrix& g = grads[i];
    if (g.rows != p.rows || g.cols != p.cols)
      throw Error(Errc::shape_mismatch, "adamw: gradient shape disagrees");
    Matrix& m = m_[i];
    Matrix& v = v_[i];
    for (size_t k = 0; k < p.v.size(); ++k) {
      // Decoupled decay, applied separately from the Adam update.
      p.v[k] -= lr_t * cfg_.weight_decay * p.v[k];
      m.v[k] = cfg_.beta1 * m.v[k] + (1.0 - cfg_.beta1) * g.v[k];
      v.v[k] = cfg_.beta2 * v.v[k] + (1.0 - cfg_.beta2) * g.v[k] * g.v[k];
      const double mhat = m.v[k] / bc1;
      const double vhat = v.v[k] / bc2;
      p.v[k] -= lr_t * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

namespace {

nlohmann::json config_header(const ModelConfig& mc, const OptimConfig& oc) {
  nlohmann::json j;
  j["model.gat_heads"] = mc.gat_heads;
  j["model.gat_hidden"] = mc.gat_hidden;
  j["model.gru_layers"] = mc.gru_layers;
  j["model.gru_hidden"] = mc.gru_hidden;
  j["model.dropout_backbone"] = mc.dropout_backbone;
  j["model.dropout_head"] = mc.dropout_head;
  j["model.mlp_hidden"] = mc.mlp_hidden;
  j["model.node_feature_dim"] = mc.node_feature_dim;
  j["model.n_nodes"] = mc.n_nodes;
  j["model.leaky_slope"] = mc.leaky_slope;
  j["model.spatial_only"] = mc.spatial_only;
  j["optim.lr"] = oc.lr;
  j["optim.weight_decay"] = oc.weight_decay;
  j["optim.betas"] = {oc.beta1, oc.beta2};
  j["optim.eps"] = oc.eps;
  j["optim.epochs"] = oc.epochs;
  j["optim.patience"] = oc.patience;
  j["optim.batch_size"] = oc.batch_size;
  return j;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model,
                     const OptimConfig& optim, const CheckpointExtras* extras) {
  nlohmann::json j;
  j["format"] = "eegraph.checkpoint.v1";
  j["config"] = config_header(model.config(), optim);
  if (extras) {
    j["variant"] = extras->variant;
    if (extras->scaler) {
      j["scaler"] = {{"mu", extras->scaler->mu},
                     {"sigma", extras->scaler->sigma},
                     {"degenerate_features", extras->scaler->degenerate_features}};
    }
  }
  nlohmann::json params = nlohmann::json::array();
  const ParamStore& store = model.params();
  for (size_t i = 0; i < store.tensor_count(); ++i) {
    const Matrix& m = store.value(i);
    nlohmann::json t;
    t["name"] = store.name(i);
    t["shape"] = {m.rows, m.cols};
    t["data"] = m.v;
    params.push_back(std::move(t));
  }
  j["params"] = std::move(params);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(Errc::file_not_found, "cannot open for writing: " + path);
    out << j.dump();
  }
  std::filesystem::rename(tmp, path);
}

Model load_checkpoint(const std::string& path, OptimConfig* optim,
                      CheckpointExtras* extras) {
  if (!std::filesystem::exists(path))
    throw Error(Errc::checkpoint_not_found, "checkpoint not found: " + path);
  std::ifstream in(path, std::ios::binary);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_value_type, std::string("malformed checkpoint: ") + e.what());
  }
  if (j.value("format", "") != "eegraph.checkpoint.v1")
    throw Error(Errc::bad_value_type, "unrecognized checkpoint format");

  const nlohmann::json& c = j.at("config");
  ModelConfig mc;
  mc.gat_heads = c.at("model.gat_heads").get<int>();
  mc.gat_hidden = c.at("model.gat_hidden").get<int>();
  mc.gru_layers = c.at("model.gru_layers").get<int>();
  mc.gru_hidden = c.at("model.gru_hidden").get<int>();
  mc.dropout_backbone = c.at("model.dropout_backbone").get<double>();
  mc.dropout_head = c.at("model.dropout_head").get<double>();
  mc.mlp_hidden = c.at("model.mlp_hidden").get<int>();
  mc.node_feature_dim = c.at("model.node_feature_dim").get<int>();
  mc.n_nodes = c.at("model.n_nodes").get<int>();
  mc.leaky_slope = c.at("model.leaky_slope").get<double>();
  mc.spatial_only = c.at("model.spatial_only").get<bool>();
  if (optim) {
    optim->lr = c.at("optim.lr").get<double>();
    optim->weight_decay = c.at("optim.weight_decay").get<double>();
    optim->beta1 = c.at("optim.betas").at(0).get<double>();
    optim->beta2 = c.at("optim.betas").at(1).get<double>();
    optim->eps = c.at("optim.eps").get<double>();
    optim->epochs = c.at("optim.epochs").get<int>();
    optim->patience = c.at("optim.patience").get<int>();
    optim->batch_size = c.at("optim.batch_size").get<int>();
  }

  Model model(mc);
  size_t filled = 0;
  for (const nlohmann::json& t : j.at("params")) {
    const std::string name = t.at("name").get<std::string>();
    const int idx = model.params().find(name);
    if (idx < 0)
      throw Error(Errc::bad_value_type, "checkpoint holds unknown tensor: " + name);
    Matrix& dst = model.params().value(static_cast<size_t>(idx));
    const auto shape = t.at("shape");
    if (shape.at(0).get<int>() != dst.rows || shape.at(1).get<int>() != dst.cols)
      throw Error(Errc::shape_mismatch, "checkpoint tensor shape disagrees: " + name);
    const auto& data = t.at("data");
    if (data.size() != dst.v.size())
      throw Error(Errc::shape_mismatch, "checkpoint tensor size disagrees: " + name);
    for (size_t k = 0; k < dst.v.size(); ++k) dst.v[k] = data.at(k).get<double>();
    ++filled;
  }
  if (filled != model.params().tensor_count())
    throw Error(Errc::shape_mismatch, "checkpoint is missing tensors");
  if (extras) {
    extras->variant = j.value("variant", "full");
    extras->scaler.reset();
    if (j.contains("scaler")) {
      ScalerStats st;
      st.mu = j["scaler"].at("mu").get<std::vector<double>>();
      st.sigma = j["scaler"].at("sigma").get<std::vector<double>>();
      st.degenerate_features = j["scaler"].at("degenerate_features").get<std::vector<int>>();
      extras->scaler = std::move(st);
    }
  }
  return model;
}

}  // namespace eegraph
