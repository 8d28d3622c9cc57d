#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eegraph/dataset.hpp"
#include "eegraph/error.hpp"
#include "eegraph/features.hpp"
#include "eegraph/preprocess.hpp"

namespace eegraph {

enum class ConnMetric { PLI, WPLI };
const char* conn_metric_name(ConnMetric m);

/// Instantaneous phase per sample per channel, wrapped to (-pi, pi].
struct PhaseSeries {
  Matrix phase;  // n_samples x channels, radians
};

/// Symmetric [0,1] matrix with zero diagonal.
struct ConnectivityMatrix {
  Matrix m;
  ConnMetric metric = ConnMetric::PLI;
  int zero_denominator_pairs = 0;  // wPLI pairs forced to 0
};

struct GraphTopology {
  // Undirected edges (i < j), parallel weight array, both sorted by (i, j).
  std::vector<std::pair<int, int>> edges;
  std::vector<double> weights;
  double threshold_value = 0.0;
  bool degenerate = false;  // threshold tied with every value; no edges survive
  int n_nodes = kNumChannels;

  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Wraps an angle difference to (-pi, pi].
double wrap_phase(double delta);

/// Phase of the frequency-domain analytic signal, column by column.
PhaseSeries analytic_phase(const Matrix& window);

ConnectivityMatrix pli(const PhaseSeries& phases);
ConnectivityMatrix wpli(const PhaseSeries& phases, WarningLog* log = nullptr);
ConnectivityMatrix connectivity(const Matrix& window, ConnMetric metric,
                                WarningLog* log = nullptr);

/// Keeps edges whose weight exceeds the given percentile of the upper
/// triangle (strict comparison; ties drop). Percentile <= 0 keeps every
/// positive-weight edge.
GraphTopology threshold_graph(const ConnectivityMatrix& c, double percentile,
                              WarningLog* log = nullptr);

GraphTopology fully_connected_topology(int n_nodes = kNumChannels);

// ---------------------------------------------------------------------------
// Dynamic graph sequences
// ---------------------------------------------------------------------------

struct GraphSnapshot {
  GraphTopology topology;
  Matrix node_features;  // 19 x 9 (possibly scaled later)
  ConnectivityMatrix connectivity;
};

struct DynamicGraphSequence {
  std::vector<GraphSnapshot> snapshots;
  std::string subject_id;
  Task task = Task::EC;

  int length() const { return static_cast<int>(snapshots.size()); }
};

DynamicGraphSequence build_graph_sequence(const WindowedRecording& rec,
                                          const std::vector<Matrix>& node_features,
                                          ConnMetric metric, double threshold_percentile,
                                          WarningLog* log = nullptr);

// ---------------------------------------------------------------------------
// PLI vs wPLI comparison
// ---------------------------------------------------------------------------

struct PliWpliRow {
  std::string subject_id;
  Task task = Task::EC;
  double pearson_r = 0.0;
  double mean_pli = 0.0;
  double mean_wpli = 0.0;
};

struct PliWpliReport {
  std::vector<PliWpliRow> rows;
  std::map<Task, double> mean_r_per_task;
  double mean_r = 0.0;
  double mean_ratio = 0.0;  // mean wPLI / mean PLI over all recordings
};

/// Pearson r between the flattened upper triangles of the window-averaged
/// PLI and wPLI matrices, per recording.
PliWpliReport pli_wpli_comparison(
    const std::map<std::string, std::map<Task, WindowedRecording>>& windows);

double pearson_r(const std::vector<double>& a, const std::vector<double>& b);

std::vector<double> upper_triangle(const Matrix& m);

}  // namespace eegraph
