#include "eegraph/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "eegraph/fft.hpp"

namespace eegraph {

const char* conn_metric_name(ConnMetric m) { return m == ConnMetric::PLI ? "pli" : "wpli"; }

double wrap_phase(double delta) {
  double w = std::remainder(delta, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

PhaseSeries analytic_phase(const Matrix& window) {
  const int n = window.rows;
  if (n < 16)
    throw Error(Errc::invalid_spec, "analytic phase needs windows of >= 16 samples");

  PhaseSeries out;
  out.phase = Matrix(n, window.cols);
  std::vector<std::complex<double>> buf(static_cast<size_t>(n));
  for (int c = 0; c < window.cols; ++c) {
    for (int i = 0; i < n; ++i) buf[static_cast<size_t>(i)] = {window(i, c), 0.0};
    fft::forward(buf);
    // Analytic signal: keep DC (and Nyquist for even n), double positive
    // frequencies, zero negative frequencies.
    const int half = n / 2;
    for (int k = 1; k < half + (n % 2); ++k) buf[static_cast<size_t>(k)] *= 2.0;
    for (int k = half + 1; k < n; ++k) buf[static_cast<size_t>(k)] = 0.0;
    fft::inverse(buf);
    for (int i = 0; i < n; ++i)
      out.phase(i, c) = std::atan2(buf[static_cast<size_t>(i)].imag(),
                                   buf[static_cast<size_t>(i)].real());
  }
  return out;
}

namespace {

ConnectivityMatrix phase_metric(const PhaseSeries& phases, ConnMetric metric, WarningLog* log) {
  const int n = phases.phase.rows;
  const int ch = phases.phase.cols;
  if (n < 2) throw Error(Errc::invalid_spec, "phase metric needs >= 2 samples");

  ConnectivityMatrix out;
  out.metric = metric;
  out.m = Matrix(ch, ch);
  for (int i = 0; i < ch; ++i) {
    for (int j = i + 1; j < ch; ++j) {
      double sum_sign = 0.0, sum_signed = 0.0, sum_abs = 0.0;
      for (int t = 0; t < n; ++t) {
        double d = wrap_phase(phases.phase(t, i) - phases.phase(t, j));
        sum_sign += (d > 0.0) - (d < 0.0);
        sum_signed += d;  // |d| * sign(d)
        sum_abs += std::abs(d);
      }
      double value;
      if (metric == ConnMetric::PLI) {
        value = std::abs(sum_sign) / n;
      } else {
        if (sum_abs <= 0.0) {
          ++out.zero_denominator_pairs;
          warn(log, "ZeroDenominator: wPLI pair (" + std::to_string(i) + "," +
                        std::to_string(j) + ") has no phase difference; entry set to 0");
          value = 0.0;
        } else {
          value = std::abs(sum_signed) / sum_abs;
        }
      }
      out.m(i, j) = value;
      out.m(j, i) = value;
    }
  }
  return out;
}

}  // namespace

ConnectivityMatrix pli(const PhaseSeries& phases) {
  return phase_metric(phases, ConnMetric::PLI, nullptr);
}

ConnectivityMatrix wpli(const PhaseSeries& phases, WarningLog* log) {
  return phase_metric(phases, ConnMetric::WPLI, log);
}

ConnectivityMatrix connectivity(const Matrix& window, ConnMetric metric, WarningLog* log) {
  return phase_metric(analytic_phase(window), metric, log);
}

std::vector<double> upper_triangle(const Matrix& m) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(m.rows) * (m.rows - 1) / 2);
  for (int i = 0; i < m.rows; ++i)
    for (int j = i + 1; j < m.cols; ++j) out.push_back(m(i, j));
  return out;
}

namespace {

// numpy-style linear-interpolation percentile of a copy of the values.
double percentile_value(std::vector<double> v, double pct) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  double pos = pct / 100.0 * static_cast<double>(v.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  if (lo >= v.size() - 1) return v.back();
  double t = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - t) + v[lo + 1] * t;
}

}  // namespace

GraphTopology threshold_graph(const ConnectivityMatrix& c, double percentile, WarningLog* log) {
  if (percentile >= 100.0)
    throw Error(Errc::invalid_spec, "threshold percentile must lie in [0, 100)");

  GraphTopology g;
  g.n_nodes = c.m.rows;
  std::vector<double> upper = upper_triangle(c.m);
  g.threshold_value = percentile <= 0.0 ? 0.0 : percentile_value(upper, percentile);

  for (int i = 0; i < c.m.rows; ++i)
    for (int j = i + 1; j < c.m.cols; ++j)
      if (c.m(i, j) > g.threshold_value) {
        g.edges.emplace_back(i, j);
        g.weights.push_back(c.m(i, j));
      }

  if (g.edges.empty()) {
    g.degenerate = true;
    warn(log, "DegenerateGraph: no edge exceeds the threshold (all-tie matrix)");
  }
  return g;
}

GraphTopology fully_connected_topology(int n_nodes) {
  GraphTopology g;
  g.n_nodes = n_nodes;
  for (int i = 0; i < n_nodes; ++i)
    for (int j = i + 1; j < n_nodes; ++j) {
      g.edges.emplace_back(i, j);
      g.weights.push_back(1.0);
    }
  return g;
}

DynamicGraphSequence build_graph_sequence(const WindowedRecording& rec,
                                          const std::vector<Matrix>& node_features,
                                          ConnMetric metric, double threshold_percentile,
                                          WarningLog* log) {
  if (node_features.size() != rec.windows.size())
    throw Error(Errc::length_mismatch,
                std::to_string(node_features.size()) + " feature matrices for " +
                    std::to_string(rec.windows.size()) + " windows");

  DynamicGraphSequence seq;
  seq.subject_id = rec.subject_id;
  seq.task = rec.task;
  seq.snapshots.reserve(rec.windows.size());
  for (size_t w = 0; w < rec.windows.size(); ++w) {
    GraphSnapshot snap;
    snap.connectivity = connectivity(rec.windows[w], metric, log);
    snap.topology = threshold_graph(snap.connectivity, threshold_percentile, log);
    snap.node_features = node_features[w];
    seq.snapshots.push_back(std::move(snap));
  }
  return seq;
}

double pearson_r(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  if (n != b.size() || n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

PliWpliReport pli_wpli_comparison(
    const std::map<std::string, std::map<Task, WindowedRecording>>& windows) {
  PliWpliReport report;
  std::map<Task, std::vector<double>> per_task_r;
  double sum_pli = 0.0, sum_wpli = 0.0;

  for (const auto& [subject, by_task] : windows) {
    for (const auto& [task, wr] : by_task) {
      // Window-averaged matrices for this recording.
      Matrix mean_pli(kNumChannels, kNumChannels), mean_wpli(kNumChannels, kNumChannels);
      for (const Matrix& win : wr.windows) {
        PhaseSeries ph = analytic_phase(win);
        ConnectivityMatrix p = pli(ph);
        ConnectivityMatrix w = wpli(ph);
        for (size_t k = 0; k < p.m.v.size(); ++k) {
          mean_pli.v[k] += p.m.v[k];
          mean_wpli.v[k] += w.m.v[k];
        }
      }
      const double nw = static_cast<double>(wr.windows.size());
      for (auto& v : mean_pli.v) v /= nw;
      for (auto& v : mean_wpli.v) v /= nw;

      PliWpliRow row;
      row.subject_id = subject;
      row.task = task;
      std::vector<double> up = upper_triangle(mean_pli);
      std::vector<double> uw = upper_triangle(mean_wpli);
      row.pearson_r = pearson_r(up, uw);
      for (double v : up) row.mean_pli += v;
      for (double v : uw) row.mean_wpli += v;
      row.mean_pli /= static_cast<double>(up.size());
      row.mean_wpli /= static_cast<double>(uw.size());
      sum_pli += row.mean_pli;
      sum_wpli += row.mean_wpli;
      per_task_r[task].push_back(row.pearson_r);
      report.rows.push_back(std::move(row));
    }
  }

  double total_r = 0.0;
  for (const auto& [task, rs] : per_task_r) {
    double m = 0.0;
    for (double r : rs) m += r;
    report.mean_r_per_task[task] = m / static_cast<double>(rs.size());
  }
  for (const auto& row : report.rows) total_r += row.pearson_r;
  if (!report.rows.empty()) {
    report.mean_r = total_r / static_cast<double>(report.rows.size());
    report.mean_ratio = sum_pli > 0.0 ? sum_wpli / sum_pli : 0.0;
  }
  return report;
}

}  // namespace eegraph
