#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "eegraph/connectivity.hpp"
#include "eegraph/features.hpp"
#include "eegraph/model.hpp"
#include "eegraph/preprocess.hpp"
#include "eegraph/rng.hpp"

using namespace eegraph;

namespace {

Matrix noise_window(int samples, int channels, uint64_t seed) {
  Rng rng(seed);
  Matrix m(samples, channels);
  for (double& v : m.v) v = rng.normal();
  return m;
}

std::vector<double> noise_signal(int samples, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(static_cast<size_t>(samples));
  for (double& v : x) v = rng.normal();
  return x;
}

DynamicGraphSequence sequence_fixture(const ModelConfig& cfg, int windows,
                                      uint64_t seed) {
  Rng rng(seed);
  DynamicGraphSequence seq;
  for (int w = 0; w < windows; ++w) {
    GraphSnapshot snap;
    snap.topology.n_nodes = cfg.n_nodes;
    for (int i = 0; i < cfg.n_nodes; ++i)
      for (int j = i + 1; j < cfg.n_nodes; ++j)
        if (rng.uniform() < 0.5) {
          snap.topology.edges.emplace_back(i, j);
          snap.topology.weights.push_back(rng.uniform());
        }
    snap.node_features = Matrix(cfg.n_nodes, cfg.node_feature_dim);
    for (double& v : snap.node_features.v) v = rng.normal();
    seq.snapshots.push_back(std::move(snap));
  }
  return seq;
}

void bm_bandpass_filtfilt(benchmark::State& state) {
  const auto x = noise_signal(15000, 1);
  const SosFilter f = SosFilter::design(FilterSpec::bandpass(0.5, 45.0, 4), 250.0);
  for (auto _ : state) benchmark::DoNotOptimize(f.filtfilt(x));
}
BENCHMARK(bm_bandpass_filtfilt);

void bm_welch_psd(benchmark::State& state) {
  const auto x = noise_signal(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(welch_psd(x, 250.0, WelchSpec{}));
}
BENCHMARK(bm_welch_psd)->Arg(500)->Arg(2000);

void bm_connectivity_window(benchmark::State& state) {
  const Matrix window = noise_window(500, 19, 3);
  const ConnMetric metric = state.range(0) == 0 ? ConnMetric::PLI : ConnMetric::WPLI;
  for (auto _ : state) benchmark::DoNotOptimize(connectivity(window, metric, nullptr));
}
BENCHMARK(bm_connectivity_window)->Arg(0)->Arg(1);

void bm_node_features_window(benchmark::State& state) {
  WindowedRecording w;
  w.plan = {500, 500, 1};
  w.windows.push_back(noise_window(500, 19, 4));
  for (auto _ : state)
    benchmark::DoNotOptimize(extract_node_features(w, 250.0, WelchSpec{}));
}
BENCHMARK(bm_node_features_window);

void bm_model_forward(benchmark::State& state) {
  ModelConfig cfg;
  cfg.gat_hidden = static_cast<int>(state.range(0));
  cfg.gru_hidden = 2 * cfg.gat_hidden;
  const Model model = Model::init(cfg, 5);
  const DynamicGraphSequence seq = sequence_fixture(cfg, 30, 6);
  for (auto _ : state) benchmark::DoNotOptimize(model.eval_logit(seq));
}
BENCHMARK(bm_model_forward)->Arg(8)->Arg(64);

void bm_model_train_step(benchmark::State& state) {
  ModelConfig cfg;
  cfg.gat_hidden = 8;
  cfg.gru_hidden = 16;
  Model model = Model::init(cfg, 7);
  const DynamicGraphSequence seq = sequence_fixture(cfg, 30, 8);
  const auto edges = Model::edge_lists_for(seq);
  for (auto _ : state) {
    Tape tape;
    const auto params = model.lift_params(tape, true);
    ModelInputs in;
    in.edges = &edges;
    for (const GraphSnapshot& s : seq.snapshots)
      in.features.push_back(tape.leaf(s.node_features, false));
    const Var loss =
        tape.bce_with_logits(model.forward(tape, params, in, false, nullptr), 1.0);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(params[0]));
  }
}
BENCHMARK(bm_model_train_step);

}  // namespace

BENCHMARK_MAIN();
