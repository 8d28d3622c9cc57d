#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eegraph/explain.hpp"
#include "eegraph/stats.hpp"
#include "eegraph/synth_profiles.hpp"
#include "support.hpp"

using namespace eegraph;
using test::random_matrix;
using test::thrown_code;

// ---------------------------------------------------------------------------
// rank and t statistics
// ---------------------------------------------------------------------------

TEST_CASE("rank test matches the normal approximation with continuity") {
  const std::vector<double> a = {3.1, 4.5, 2.2, 5.0, 3.3, 4.1, 2.8};
  const std::vector<double> b = {6.2, 5.9, 7.1, 5.5, 6.8, 7.4, 5.1};
  const MannWhitneyResult r = mann_whitney_u(a, b);
  CHECK(r.u == 0.0);  // complete separation, first group low
  CHECK(r.p == doctest::Approx(0.0021650293330383757).epsilon(1e-12));
  CHECK(!r.degenerate);
}

TEST_CASE("rank test applies the tie correction") {
  const MannWhitneyResult r = mann_whitney_u({1, 2, 2, 3, 5}, {2, 4, 4, 6, 7});
  CHECK(r.u == 5.0);
  CHECK(r.p == doctest::Approx(0.13756389390990328).epsilon(1e-12));
}

TEST_CASE("identical samples are maximally insignificant") {
  const MannWhitneyResult r = mann_whitney_u({1, 2, 3}, {1, 2, 3});
  CHECK(r.u == 4.5);
  CHECK(r.p == 1.0);

  // Every observation equal: the rank variance collapses entirely.
  const MannWhitneyResult flat = mann_whitney_u({2, 2, 2}, {2, 2, 2});
  CHECK(flat.degenerate);
  CHECK(flat.p == 1.0);

  CHECK(thrown_code([] { mann_whitney_u({}, {1.0}); }) == Errc::invalid_spec);
}

TEST_CASE("unequal-variance t test matches its reference values") {
  const WelchTResult r =
      welch_t_test({2.1, 3.4, 2.9, 4.0, 3.1}, {5.6, 6.1, 7.0, 5.2});
  CHECK(r.t == doctest::Approx(-5.777508655074859).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(6.18445602332773).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.0010566951775062131).epsilon(1e-9));

  const WelchTResult flat = welch_t_test({1, 1, 1}, {1, 1, 1});
  CHECK(flat.degenerate);
  CHECK(flat.p == 1.0);

  CHECK(thrown_code([] { welch_t_test({1.0}, {1.0, 2.0}); }) == Errc::invalid_spec);
}

TEST_CASE("a three-sigma shift in seven-vs-seven reaches significance") {
  Rng rng(404);
  std::vector<double> a, b;
  for (int i = 0; i < 7; ++i) {
    a.push_back(10.0 + rng.normal());
    b.push_back(13.0 + rng.normal());
  }
  CHECK(mann_whitney_u(a, b).p < 0.05);
  CHECK(welch_t_test(a, b).p < 0.05);
}

// ---------------------------------------------------------------------------
// cohort statistics
// ---------------------------------------------------------------------------

namespace {

/// Full nine-task grid where every subject holds byte-identical recordings.
Dataset identical_cohort() {
  Dataset ds;
  for (int i = 0; i < 4; ++i) {
    SubjectLabel s;
    s.subject_id = "S" + std::to_string(i + 1);
    s.label = i % 2 == 0 ? Label::Addicted : Label::NotAddicted;
    ds.labels.push_back(s);
  }
  for (Task t : all_tasks()) {
    SynthSpec spec;
    spec.components.push_back(SynthComponent::uniform(10.0, 1.0));
    spec.components.push_back(SynthComponent::on_channels(6.0, {{9, 1.2}, {7, 1.2}}, 0.4));
    spec.noise_sd = 0.3;
    spec.duration_s = t == Task::ET ? 8.0 : 4.0;
    spec.seed = 17 + static_cast<uint64_t>(t);
    const Recording proto = synth_recording("S1", t, spec);
    for (const SubjectLabel& s : ds.labels) {
      Recording rec = proto;
      rec.subject_id = s.subject_id;
      ds.recordings[s.subject_id][t] = std::move(rec);
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("identical groups produce null differences and p of one") {
  const Dataset ds = identical_cohort();
  const GroupStatsReport rep = group_stats(ds, PreprocessConfig{}, WelchSpec{});
  CHECK(rep.test_name == "mann_whitney");
  REQUIRE(rep.connectivity.size() == 9);
  REQUIRE(rep.band_tests.size() == 9 * 5);

  for (const ConditionConnectivity& cc : rep.connectivity) {
    for (double v : cc.difference.v) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cc.mean_addicted.rows == 19);
  }
  for (const BandPowerTest& bt : rep.band_tests) {
    CHECK(bt.mean_addicted == doctest::Approx(bt.mean_not_addicted).epsilon(1e-12));
    CHECK(bt.p_value == doctest::Approx(1.0));
  }
}

TEST_CASE("the planted cohort separates in the expected band and pair") {
  SynthConfig sc;
  sc.n_subjects = 8;
  sc.base_duration_s = 4.0;
  sc.noise_sd = 0.5;
  const Dataset ds = build_synthetic_dataset(sc);
  const GroupStatsReport rep = group_stats(ds, PreprocessConfig{}, WelchSpec{});

  const PlantedChannels pc = planted_channels();
  int beta_rows = 0;
  for (const BandPowerTest& bt : rep.band_tests) {
    if (bt.band != "Beta") continue;
    ++beta_rows;
    CHECK(bt.mean_addicted > bt.mean_not_addicted);
    CHECK(bt.p_value < 0.05);
  }
  CHECK(beta_rows == 9);

  // The phase-locked pair stands out in the group difference of every task.
  for (const ConditionConnectivity& cc : rep.connectivity)
    CHECK(cc.difference(pc.cz, pc.t7) > 0.2);
}

// ---------------------------------------------------------------------------
// integrated gradients
// ---------------------------------------------------------------------------

namespace {

GraphTopology topo_of(int n_nodes, std::vector<std::pair<int, int>> edges) {
  GraphTopology topo;
  topo.n_nodes = n_nodes;
  topo.edges = std::move(edges);
  topo.weights.assign(topo.edges.size(), 1.0);
  return topo;
}

ModelConfig small_config(bool spatial_only) {
  ModelConfig cfg;
  cfg.node_feature_dim = 3;
  cfg.n_nodes = 4;
  cfg.gat_heads = 2;
  cfg.gat_hidden = 3;
  cfg.gru_layers = 2;
  cfg.gru_hidden = 4;
  cfg.mlp_hidden = 4;
  cfg.spatial_only = spatial_only;
  return cfg;
}

DynamicGraphSequence small_sequence(const ModelConfig& cfg, int windows, uint64_t seed,
                                    bool non_negative) {
  Rng rng(seed);
  DynamicGraphSequence seq;
  for (int w = 0; w < windows; ++w) {
    GraphSnapshot snap;
    snap.topology = topo_of(cfg.n_nodes, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    snap.node_features = random_matrix(cfg.n_nodes, cfg.node_feature_dim, rng);
    if (non_negative)
      for (double& v : snap.node_features.v) v = std::abs(v);
    seq.snapshots.push_back(std::move(snap));
  }
  return seq;
}

/// Attention constants zeroed, weights made non-negative, biases left zero:
/// on the non-negative orthant the whole network is one linear map, which
/// gives the attribution integral in closed form.
Model linear_surrogate(const ModelConfig& cfg, uint64_t seed) {
  Model model = Model::init(cfg, seed);
  for (size_t i = 0; i < model.params().tensor_count(); ++i) {
    const std::string& name = model.params().name(i);
    Matrix& m = model.params().value(i);
    if (name.find("a_dst") != std::string::npos || name.find("a_src") != std::string::npos) {
      for (double& v : m.v) v = 0.0;
    } else {
      for (double& v : m.v) v = std::abs(v);
    }
  }
  return model;
}

}  // namespace

TEST_CASE("attributing the baseline to itself yields zero") {
  const ModelConfig cfg = small_config(false);
  const Model model = Model::init(cfg, 71);
  DynamicGraphSequence zero = small_sequence(cfg, 2, 72, false);
  for (GraphSnapshot& s : zero.snapshots)
    for (double& v : s.node_features.v) v = 0.0;

  const AttributionMap attr = integrated_gradients(model, zero, 16);
  REQUIRE(attr.windows.size() == 2);
  for (const Matrix& w : attr.windows)
    for (double v : w.v) CHECK(v == 0.0);
  CHECK(channel_importance(attr) == std::vector<double>(4, 0.0));
}

TEST_CASE("a linear network is attributed exactly at any step count") {
  const ModelConfig cfg = small_config(true);
  const Model model = linear_surrogate(cfg, 81);
  const DynamicGraphSequence seq = small_sequence(cfg, 2, 82, true);

  const AttributionMap one = integrated_gradients(model, seq, 1);
  const AttributionMap many = integrated_gradients(model, seq, 128);
  REQUIRE(one.windows.size() == many.windows.size());
  for (size_t w = 0; w < one.windows.size(); ++w)
    for (size_t k = 0; k < one.windows[w].v.size(); ++k)
      CHECK(one.windows[w].v[k] ==
            doctest::Approx(many.windows[w].v[k]).epsilon(1e-12));

  // attribution(i) == x_i * dF/dx_i, with the slope taken by central difference
  const double eps = 1e-6;
  for (size_t w = 0; w < seq.snapshots.size(); ++w) {
    for (int r = 0; r < cfg.n_nodes; ++r) {
      for (int c = 0; c < cfg.node_feature_dim; ++c) {
        DynamicGraphSequence hi = seq, lo = seq;
        hi.snapshots[w].node_features(r, c) += eps;
        lo.snapshots[w].node_features(r, c) -= eps;
        const double slope =
            (model.eval_logit(hi) - model.eval_logit(lo)) / (2.0 * eps);
        const double want = seq.snapshots[w].node_features(r, c) * slope;
        CHECK(many.windows[w](r, c) == doctest::Approx(want).epsilon(1e-6));
      }
    }
  }

  const IgCompleteness c = ig_completeness(model, seq, many);
  CHECK(c.relative_error < 1e-10);
}

TEST_CASE("attribution sums converge on the output gap for a real model") {
  const ModelConfig cfg = small_config(false);
  const Model model = Model::init(cfg, 91);
  const DynamicGraphSequence seq = small_sequence(cfg, 3, 92, false);

  const AttributionMap base = integrated_gradients(model, seq, 128);
  const IgCompleteness at_base = ig_completeness(model, seq, base);
  CHECK(at_base.relative_error < 0.01);
  CHECK(at_base.model_at_input == doctest::Approx(model.eval_logit(seq)));

  const AttributionMap fine = integrated_gradients(model, seq, 256);
  const IgCompleteness at_fine = ig_completeness(model, seq, fine);
  CHECK(at_fine.relative_error < 0.005);
}

TEST_CASE("importance marginals normalize and localize") {
  AttributionMap attr;
  attr.windows.assign(2, Matrix(19, 9));
  for (Matrix& w : attr.windows)
    for (double& v : w.v) v = 0.25;
  const auto by_channel = channel_importance(attr);
  const auto by_feature = feature_importance(attr);
  REQUIRE(by_channel.size() == 19);
  REQUIRE(by_feature.size() == 9);
  for (double v : by_channel) CHECK(v == doctest::Approx(1.0 / 19.0).epsilon(1e-12));
  for (double v : by_feature) CHECK(v == doctest::Approx(1.0 / 9.0).epsilon(1e-12));

  AttributionMap onehot;
  onehot.windows.assign(1, Matrix(19, 9));
  onehot.windows[0](9, 3) = -0.7;  // sign must not matter
  const auto ch = channel_importance(onehot);
  const auto ft = feature_importance(onehot);
  CHECK(ch[9] == doctest::Approx(1.0));
  CHECK(std::accumulate(ch.begin(), ch.end(), 0.0) == doctest::Approx(1.0));
  CHECK(ft[3] == doctest::Approx(1.0));
}

// ---------------------------------------------------------------------------
// edge importance
// ---------------------------------------------------------------------------

TEST_CASE("edge saliency is symmetric, hollow, and max-normalized") {
  ModelConfig cfg = small_config(false);
  cfg.n_nodes = 3;
  const Model model = Model::init(cfg, 101);

  Rng rng(102);
  DynamicGraphSequence seq;
  for (int w = 0; w < 2; ++w) {
    GraphSnapshot snap;
    snap.topology = topo_of(3, {{0, 1}, {0, 2}});
    snap.node_features = random_matrix(3, cfg.node_feature_dim, rng);
    for (int c = 0; c < cfg.node_feature_dim; ++c) snap.node_features(2, c) = 0.0;
    seq.snapshots.push_back(std::move(snap));
  }

  const Matrix imp = edge_importance(model, {&seq});
  REQUIRE(imp.rows == 3);
  REQUIRE(imp.cols == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(imp(i, i) == 0.0);
    for (int j = 0; j < 3; ++j) CHECK(imp(i, j) == imp(j, i));
  }
  CHECK(imp(1, 2) == 0.0);  // never an edge in any window
  CHECK(*std::max_element(imp.v.begin(), imp.v.end()) == doctest::Approx(1.0));
  // The edge towards the silent node matters less than the active pair.
  CHECK(imp(0, 1) > imp(0, 2));
}

TEST_CASE("top connections rank by importance with lexicographic ties") {
  const std::vector<std::string> names(channel_names().begin(), channel_names().end());

  Matrix imp(19, 19);
  imp(4, 9) = imp(9, 4) = 1.0;    // Fz-Cz pair
  imp(7, 9) = imp(9, 7) = 0.6;    // T7-Cz pair
  imp(0, 1) = imp(1, 0) = 0.25;   // Fp1-Fp2
  const auto top = top_connections(imp, 3, names);
  REQUIRE(top.size() == 3);
  CHECK(top[0].label == "Cz-Fz");  // later channel in montage order comes first
  CHECK(top[0].importance == 1.0);
  CHECK(top[0].i == 4);
  CHECK(top[0].j == 9);
  CHECK(top[1].label == "Cz-T7");
  CHECK(top[2].label == "Fp2-Fp1");

  CHECK(top_connections(imp, 0, names).empty());
  CHECK(thrown_code([&] { top_connections(imp, 172, names); }) == Errc::invalid_spec);
  CHECK(thrown_code([&] { top_connections(imp, -1, names); }) == Errc::invalid_spec);

  Matrix flat(19, 19);
  for (double& v : flat.v) v = 0.5;
  for (int i = 0; i < 19; ++i) flat(i, i) = 0.0;
  const auto tied = top_connections(flat, 4, names);
  std::vector<std::string> labels;
  for (const RankedEdge& e : tied) labels.push_back(e.label);
  CHECK(std::is_sorted(labels.begin(), labels.end()));
}
