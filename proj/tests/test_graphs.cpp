#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eegraph/connectivity.hpp"
#include "eegraph/preprocess.hpp"
#include "support.hpp"

using namespace eegraph;
using test::thrown_code;
using test::tone;

namespace {

PhaseSeries phase_pair(const std::vector<double>& delta) {
  // Channel 0 carries the phase difference, channel 1 stays at zero.
  PhaseSeries ps;
  ps.phase = Matrix(static_cast<int>(delta.size()), 2);
  for (size_t i = 0; i < delta.size(); ++i) ps.phase(static_cast<int>(i), 0) = delta[i];
  return ps;
}

Matrix two_channel_window(const std::vector<double>& a, const std::vector<double>& b) {
  Matrix m(static_cast<int>(a.size()), 2);
  m.set_column(0, a);
  m.set_column(1, b);
  return m;
}

std::vector<double> unwrap(const std::vector<double>& ph) {
  std::vector<double> out = ph;
  for (size_t i = 1; i < out.size(); ++i) {
    double d = out[i] - out[i - 1];
    while (d > M_PI) d -= 2.0 * M_PI;
    while (d < -M_PI) d += 2.0 * M_PI;
    out[i] = out[i - 1] + d;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// instantaneous phase
// ---------------------------------------------------------------------------

TEST_CASE("wrap_phase maps into (-pi, pi]") {
  CHECK(wrap_phase(3.0 * M_PI / 2.0) == doctest::Approx(-M_PI / 2.0));
  CHECK(wrap_phase(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_phase(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_phase(0.3) == doctest::Approx(0.3));
}

TEST_CASE("analytic phase of a cosine advances at the tone frequency") {
  const double fs = 250.0;
  const int n = 500;
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = std::cos(2.0 * M_PI * 10.0 * i / fs);
  Matrix win(n, 1);
  win.set_column(0, x);
  const PhaseSeries ps = analytic_phase(win);
  const std::vector<double> ph = unwrap(ps.phase.column(0));
  // Instantaneous frequency from phase increments over the central 80%.
  for (int i = n / 10; i < n - n / 10 - 1; ++i) {
    const double f_inst = (ph[static_cast<size_t>(i) + 1] - ph[static_cast<size_t>(i)]) * fs /
                          (2.0 * M_PI);
    CHECK(f_inst == doctest::Approx(10.0).epsilon(0.02));
  }
}

TEST_CASE("identical channels have zero phase difference") {
  const auto x = tone(10.0, 250.0, 2.0);
  const PhaseSeries ps = analytic_phase(two_channel_window(x, x));
  for (int i = 0; i < ps.phase.rows; ++i)
    CHECK(wrap_phase(ps.phase(i, 0) - ps.phase(i, 1)) == doctest::Approx(0.0));
}

TEST_CASE("cosine leads sine by a quarter cycle") {
  const double fs = 250.0;
  const int n = 500;
  std::vector<double> c(static_cast<size_t>(n)), s(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    c[static_cast<size_t>(i)] = std::cos(2.0 * M_PI * 10.0 * i / fs);
    s[static_cast<size_t>(i)] = std::sin(2.0 * M_PI * 10.0 * i / fs);
  }
  const PhaseSeries ps = analytic_phase(two_channel_window(c, s));
  for (int i = n / 10; i < n - n / 10; ++i)
    CHECK(wrap_phase(ps.phase(i, 0) - ps.phase(i, 1)) == doctest::Approx(M_PI / 2.0).epsilon(0.01));
}

// ---------------------------------------------------------------------------
// PLI
// ---------------------------------------------------------------------------

TEST_CASE("pli of a constant lag is exactly 1") {
  const ConnectivityMatrix c = pli(phase_pair(std::vector<double>(100, 0.3)));
  CHECK(c.m(0, 1) == 1.0);
  CHECK(c.m(1, 0) == 1.0);
  CHECK(c.m(0, 0) == 0.0);
}

TEST_CASE("pli of sign-balanced jitter is exactly 0") {
  std::vector<double> delta(100);
  for (size_t i = 0; i < delta.size(); ++i) delta[i] = i % 2 == 0 ? 0.1 : -0.1;
  CHECK(pli(phase_pair(delta)).m(0, 1) == 0.0);
}

TEST_CASE("pli hand case: four samples, three positive") {
  const ConnectivityMatrix c = pli(phase_pair({0.4, 0.4, -0.1, 0.2}));
  CHECK(c.m(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// wPLI
// ---------------------------------------------------------------------------

TEST_CASE("wpli of a constant lag is exactly 1") {
  CHECK(wpli(phase_pair(std::vector<double>(64, 0.3))).m(0, 1) == 1.0);
}

TEST_CASE("wpli hand case: weights |0.4| and |-0.1|") {
  const ConnectivityMatrix c = wpli(phase_pair({0.4, -0.1}));
  CHECK(c.m(0, 1) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("wpli of antisymmetric lags is 0, zero denominators are flagged") {
  CHECK(wpli(phase_pair({0.2, -0.2})).m(0, 1) == doctest::Approx(0.0).epsilon(1e-12));

  WarningLog log;
  const ConnectivityMatrix z = wpli(phase_pair({0.0, 0.0, 0.0}), &log);
  CHECK(z.m(0, 1) == 0.0);
  CHECK(z.zero_denominator_pairs == 1);
  CHECK(!log.empty());
}

// ---------------------------------------------------------------------------
// connectivity on raw windows
// ---------------------------------------------------------------------------

TEST_CASE("a steady quarter-cycle lag scores 1 under both metrics") {
  const double fs = 250.0;
  const auto a = tone(10.0, fs, 2.0, 1.0, 0.0);
  const auto b = tone(10.0, fs, 2.0, 1.0, -M_PI / 2.0);
  const Matrix win = two_channel_window(a, b);
  CHECK(connectivity(win, ConnMetric::PLI).m(0, 1) == 1.0);
  CHECK(connectivity(win, ConnMetric::WPLI).m(0, 1) == 1.0);
}

TEST_CASE("independent noise scores near zero") {
  Rng rng(31);
  std::vector<double> a(500), b(500);
  for (double& v : a) v = rng.normal();
  for (double& v : b) v = rng.normal();
  const ConnectivityMatrix c = connectivity(two_channel_window(a, b), ConnMetric::PLI);
  CHECK(c.m(0, 1) < 0.1);
}

TEST_CASE("connectivity matrices are symmetric with zero diagonal in [0,1]") {
  Rng rng(32);
  Matrix win(500, 5);
  for (double& v : win.v) v = rng.normal();
  for (ConnMetric m : {ConnMetric::PLI, ConnMetric::WPLI}) {
    const ConnectivityMatrix c = connectivity(win, m);
    for (int i = 0; i < 5; ++i) {
      CHECK(c.m(i, i) == 0.0);
      for (int j = 0; j < 5; ++j) {
        CHECK(c.m(i, j) == c.m(j, i));
        CHECK(c.m(i, j) >= 0.0);
        CHECK(c.m(i, j) <= 1.0);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// thresholding
// ---------------------------------------------------------------------------

TEST_CASE("median thresholding 171 distinct weights keeps the strict top 85") {
  ConnectivityMatrix c;
  c.m = Matrix(kNumChannels, kNumChannels);
  double w = 0.0;
  for (int i = 0; i < kNumChannels; ++i)
    for (int j = i + 1; j < kNumChannels; ++j) {
      w += 1.0 / 200.0;
      c.m(i, j) = w;
      c.m(j, i) = w;
    }
  const GraphTopology g = threshold_graph(c, 50.0);
  CHECK(g.edge_count() == 85);
  CHECK_FALSE(g.degenerate);
  // Edges are the (i, j)-sorted upper triangle with parallel weights.
  for (int e = 0; e + 1 < g.edge_count(); ++e)
    CHECK(g.edges[static_cast<size_t>(e)] < g.edges[static_cast<size_t>(e) + 1]);
  for (int e = 0; e < g.edge_count(); ++e)
    CHECK(g.weights[static_cast<size_t>(e)] ==
          c.m(g.edges[static_cast<size_t>(e)].first, g.edges[static_cast<size_t>(e)].second));
}

TEST_CASE("an all-equal matrix keeps nothing and is flagged degenerate") {
  ConnectivityMatrix c;
  c.m = Matrix(kNumChannels, kNumChannels);
  for (int i = 0; i < kNumChannels; ++i)
    for (int j = 0; j < kNumChannels; ++j) c.m(i, j) = i == j ? 0.0 : 0.4;
  WarningLog log;
  const GraphTopology g = threshold_graph(c, 50.0, &log);
  CHECK(g.edge_count() == 0);
  CHECK(g.degenerate);
  CHECK(!log.empty());
}

TEST_CASE("percentile zero keeps every positive-weight edge") {
  ConnectivityMatrix c;
  c.m = Matrix(4, 4);
  c.m(0, 1) = c.m(1, 0) = 0.5;
  c.m(2, 3) = c.m(3, 2) = 0.2;
  const GraphTopology g = threshold_graph(c, 0.0);
  CHECK(g.edge_count() == 2);
  CHECK(thrown_code([&] { threshold_graph(c, 100.0); }) == Errc::invalid_spec);
}

TEST_CASE("fully connected topology has n(n-1)/2 edges") {
  const GraphTopology g = fully_connected_topology();
  CHECK(g.edge_count() == 171);
  CHECK(g.n_nodes == kNumChannels);
  CHECK(fully_connected_topology(5).edge_count() == 10);
}

// ---------------------------------------------------------------------------
// dynamic graph sequences
// ---------------------------------------------------------------------------

namespace {

/// Stationary 19-channel recording: half the montage phase-locked at 10 Hz
/// with distinct lags, the rest independent noise.
Recording stationary_recording(double duration_s, uint64_t seed) {
  SynthSpec spec;
  SynthComponent locked = SynthComponent::uniform(10.0, 0.0);
  for (int c = 0; c < 10; ++c) {
    locked.amp[static_cast<size_t>(c)] = 1.5;
    locked.phase[static_cast<size_t>(c)] = 0.25 * c;
  }
  spec.components = {locked};
  spec.noise_sd = 0.8;
  spec.duration_s = duration_s;
  spec.seed = seed;
  return synth_recording("S1", Task::EC, spec);
}

}  // namespace

TEST_CASE("graph sequences carry one snapshot per window") {
  const Recording rec = stationary_recording(8.0, 41);
  const WindowedRecording w =
      windowize(rec, plan_windows(rec.n_samples(), 250.0, 4, 2.0));
  const auto feats = extract_node_features(w, 250.0, {500, 0.5});
  const DynamicGraphSequence seq =
      build_graph_sequence(w, feats, ConnMetric::PLI, 50.0);
  CHECK(seq.length() == 4);
  for (const GraphSnapshot& s : seq.snapshots) {
    CHECK(s.node_features.rows == kNumChannels);
    CHECK(s.topology.edge_count() > 0);
    CHECK(s.connectivity.metric == ConnMetric::PLI);
  }

  const WindowedRecording one =
      windowize(rec, plan_windows(rec.n_samples(), 250.0, 1, 2.0));
  CHECK(build_graph_sequence(one, extract_node_features(one, 250.0, {500, 0.5}),
                             ConnMetric::PLI, 50.0)
            .length() == 1);

  CHECK(thrown_code([&] {
          build_graph_sequence(w, std::vector<Matrix>(2), ConnMetric::PLI, 50.0);
        }) == Errc::length_mismatch);
}

TEST_CASE("consecutive windows of a stationary signal agree") {
  const Recording rec = stationary_recording(8.0, 42);
  const WindowedRecording w =
      windowize(rec, plan_windows(rec.n_samples(), 250.0, 4, 2.0));
  std::vector<Matrix> plis;
  for (const Matrix& win : w.windows) plis.push_back(pli(analytic_phase(win)).m);
  for (size_t k = 0; k + 1 < plis.size(); ++k) {
    const double r = pearson_r(upper_triangle(plis[k]), upper_triangle(plis[k + 1]));
    CHECK(r > 0.9);
  }
}

// ---------------------------------------------------------------------------
// PLI vs wPLI comparison report
// ---------------------------------------------------------------------------

TEST_CASE("pearson_r basics") {
  CHECK(pearson_r({1.0, 2.0, 4.0, 8.0}, {1.0, 2.0, 4.0, 8.0}) == doctest::Approx(1.0));
  CHECK(pearson_r({1.0, 2.0, 3.0}, {5.0, 3.0, 1.0}) == doctest::Approx(-1.0));
  CHECK(pearson_r({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}) == 0.0);  // degenerate guard
}

TEST_CASE("upper_triangle walks the i<j entries in row order") {
  Matrix m(3, 3);
  m(0, 1) = 1.0;
  m(0, 2) = 2.0;
  m(1, 2) = 3.0;
  const auto u = upper_triangle(m);
  REQUIRE(u.size() == 3);
  CHECK(u[0] == 1.0);
  CHECK(u[1] == 2.0);
  CHECK(u[2] == 3.0);
  CHECK(upper_triangle(Matrix(kNumChannels, kNumChannels)).size() == 171);
}

TEST_CASE("fully locked recordings give a wPLI/PLI ratio of exactly 1") {
  // Every pair keeps a constant lag, so both metrics saturate at 1.
  SynthSpec spec;
  SynthComponent locked = SynthComponent::uniform(10.0, 0.0);
  for (int c = 0; c < kNumChannels; ++c) {
    locked.amp[static_cast<size_t>(c)] = 1.0;
    locked.phase[static_cast<size_t>(c)] = 0.11 * c;
  }
  spec.components = {locked};
  spec.duration_s = 4.0;
  const Recording rec = synth_recording("S1", Task::EC, spec);
  std::map<std::string, std::map<Task, WindowedRecording>> windows;
  windows["S1"][Task::EC] =
      windowize(rec, plan_windows(rec.n_samples(), 250.0, 2, 2.0));
  const PliWpliReport rep = pli_wpli_comparison(windows);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].mean_pli == doctest::Approx(1.0));
  CHECK(rep.mean_ratio == doctest::Approx(1.0));
}

TEST_CASE("comparison report covers every recording and stays in range") {
  std::map<std::string, std::map<Task, WindowedRecording>> windows;
  for (const char* sid : {"S1", "S2"}) {
    const Recording rec = stationary_recording(8.0, sid[1]);
    windows[sid][Task::EC] =
        windowize(rec, plan_windows(rec.n_samples(), 250.0, 4, 2.0));
    windows[sid][Task::EO] =
        windowize(rec, plan_windows(rec.n_samples(), 250.0, 3, 2.0));
  }
  const PliWpliReport rep = pli_wpli_comparison(windows);
  CHECK(rep.rows.size() == 4);
  CHECK(rep.mean_r_per_task.size() == 2);
  for (const PliWpliRow& row : rep.rows) {
    CHECK(row.pearson_r >= -1.0);
    CHECK(row.pearson_r <= 1.0);
    CHECK(row.mean_pli > 0.0);
    CHECK(row.mean_wpli > 0.0);
  }
  CHECK(rep.mean_ratio > 0.0);
}

TEST_CASE("an anti-correlated pair of triangles has negative r") {
  std::vector<double> a, b;
  for (int k = 0; k < 171; ++k) {
    a.push_back(static_cast<double>(k));
    b.push_back(static_cast<double>(171 - k));
  }
  CHECK(pearson_r(a, b) < 0.0);
}
