#include "eegraph/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "eegraph/fft.hpp"

namespace eegraph {

const std::vector<BandDef>& standard_bands() {
  static const std::vector<BandDef> bands = {
      {"Delta", 0.5, 4.0}, {"Theta", 4.0, 8.0}, {"Alpha", 8.0, 13.0},
      {"Beta", 13.0, 30.0}, {"Gamma", 30.0, 45.0}};
  return bands;
}

const std::vector<std::string>& node_feature_names() {
  static const std::vector<std::string> names = {
      "Delta", "Theta", "Alpha", "Beta", "Gamma",
      "HjorthActivity", "HjorthMobility", "HjorthComplexity", "MeanAmplitude"};
  return names;
}

Psd welch_psd(const std::vector<double>& x, double sample_rate_hz, const WelchSpec& spec) {
  const int n = static_cast<int>(x.size());
  const int seg = spec.segment_len_samples;
  if (seg < 2) throw Error(Errc::invalid_spec, "Welch segment must have >= 2 samples");
  if (!(spec.overlap_fraction >= 0.0 && spec.overlap_fraction < 1.0))
    throw Error(Errc::invalid_spec, "Welch overlap must lie in [0, 1)");
  if (seg > n)
    throw Error(Errc::segment_too_long,
                "segment of " + std::to_string(seg) + " samples exceeds signal of " +
                    std::to_string(n));

  int step = std::max(1, static_cast<int>(seg * (1.0 - spec.overlap_fraction) + 0.5));

  // Periodic Hann window.
  std::vector<double> w(static_cast<size_t>(seg));
  double win_sumsq = 0.0;
  for (int i = 0; i < seg; ++i) {
    w[static_cast<size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / seg));
    win_sumsq += w[static_cast<size_t>(i)] * w[static_cast<size_t>(i)];
  }

  const int n_freqs = seg / 2 + 1;
  Psd out;
  out.freqs.resize(static_cast<size_t>(n_freqs));
  out.psd.assign(static_cast<size_t>(n_freqs), 0.0);
  for (int k = 0; k < n_freqs; ++k)
    out.freqs[static_cast<size_t>(k)] = k * sample_rate_hz / seg;

  int n_segments = 0;
  std::vector<std::complex<double>> buf(static_cast<size_t>(seg));
  for (int start = 0; start + seg <= n; start += step) {
    double mean = 0.0;
    for (int i = 0; i < seg; ++i) mean += x[static_cast<size_t>(start + i)];
    mean /= seg;
    for (int i = 0; i < seg; ++i)
      buf[static_cast<size_t>(i)] = {(x[static_cast<size_t>(start + i)] - mean) *
                                         w[static_cast<size_t>(i)],
                                     0.0};
    fft::forward(buf);
    for (int k = 0; k < n_freqs; ++k) {
      double p = std::norm(buf[static_cast<size_t>(k)]) / (sample_rate_hz * win_sumsq);
      // One-sided density: double everything except DC and Nyquist.
      if (k != 0 && !(seg % 2 == 0 && k == n_freqs - 1)) p *= 2.0;
      out.psd[static_cast<size_t>(k)] += p;
    }
    ++n_segments;
  }
  for (auto& p : out.psd) p /= n_segments;
  return out;
}

double integrate_psd(const Psd& p, double low_hz, double high_hz) {
  const auto& f = p.freqs;
  const auto& s = p.psd;
  const int n = static_cast<int>(f.size());
  if (n < 2 || high_hz <= low_hz) return 0.0;

  double lo = std::max(low_hz, f.front());
  double hi = std::min(high_hz, f.back());
  if (hi <= lo) return 0.0;

  auto value_at = [&](double freq) {
    auto it = std::upper_bound(f.begin(), f.end(), freq);
    int j = static_cast<int>(it - f.begin());
    if (j <= 0) return s.front();
    if (j >= n) return s.back();
    double t = (freq - f[static_cast<size_t>(j - 1)]) /
               (f[static_cast<size_t>(j)] - f[static_cast<size_t>(j - 1)]);
    return s[static_cast<size_t>(j - 1)] * (1.0 - t) + s[static_cast<size_t>(j)] * t;
  };

  // Trapezoid over interior grid points plus the interpolated edges.
  double total = 0.0;
  double prev_f = lo, prev_v = value_at(lo);
  for (int k = 0; k < n; ++k) {
    double fk = f[static_cast<size_t>(k)];
    if (fk <= lo) continue;
    if (fk >= hi) break;
    total += 0.5 * (prev_v + s[static_cast<size_t>(k)]) * (fk - prev_f);
    prev_f = fk;
    prev_v = s[static_cast<size_t>(k)];
  }
  total += 0.5 * (prev_v + value_at(hi)) * (hi - prev_f);
  return total;
}

std::vector<double> band_powers(const Psd& p, const std::vector<BandDef>& bands) {
  std::vector<double> out;
  out.reserve(bands.size());
  for (const auto& b : bands) out.push_back(integrate_psd(p, b.low_hz, b.high_hz));
  return out;
}

namespace {

double population_sd(const std::vector<double>& x) {
  const size_t n = x.size();
  if (n == 0) return 0.0;
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  return std::sqrt(var / static_cast<double>(n));
}

std::vector<double> first_difference(const std::vector<double>& x) {
  std::vector<double> d(x.size() > 0 ? x.size() - 1 : 0);
  for (size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
  return d;
}

}  // namespace

HjorthFeatures hjorth(const std::vector<double>& x) {
  HjorthFeatures h;
  if (x.size() < 3) return h;

  double mean_abs = 0.0;
  for (double v : x) mean_abs += std::abs(v);
  h.mean_amplitude = mean_abs / static_cast<double>(x.size());

  double sd0 = population_sd(x);
  h.activity = sd0 * sd0;
  if (sd0 < 1e-12) return h;  // degenerate: activity/mobility/complexity zero

  std::vector<double> d1 = first_difference(x);
  double sd1 = population_sd(d1);
  h.mobility = sd1 / sd0;
  if (sd1 < 1e-12) return h;

  std::vector<double> d2 = first_difference(d1);
  double sd2 = population_sd(d2);
  h.complexity = (sd2 / sd1) / h.mobility;
  return h;
}

std::vector<Matrix> extract_node_features(const WindowedRecording& w, double sample_rate_hz,
                                          const WelchSpec& spec) {
  std::vector<Matrix> out;
  out.reserve(w.windows.size());
  const auto& bands = standard_bands();
  for (const Matrix& win : w.windows) {
    Matrix feats(win.cols, kNumNodeFeatures);
    for (int c = 0; c < win.cols; ++c) {
      std::vector<double> chan = win.column(c);
      Psd psd = welch_psd(chan, sample_rate_hz, spec);
      std::vector<double> bp = band_powers(psd, bands);
      for (int b = 0; b < kNumBands; ++b) feats(c, b) = bp[static_cast<size_t>(b)];
      HjorthFeatures h = hjorth(chan);
      feats(c, 5) = h.activity;
      feats(c, 6) = h.mobility;
      feats(c, 7) = h.complexity;
      feats(c, 8) = h.mean_amplitude;
    }
    out.push_back(std::move(feats));
  }
  return out;
}

ScalerStats fit_feature_scaler(const std::vector<Matrix>& train_features, WarningLog* log) {
  ScalerStats stats;
  if (train_features.empty()) return stats;
  const int cols = train_features.front().cols;
  stats.mu.assign(static_cast<size_t>(cols), 0.0);
  stats.sigma.assign(static_cast<size_t>(cols), 0.0);

  long count = 0;
  for (const Matrix& m : train_features) count += m.rows;
  for (const Matrix& m : train_features)
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < cols; ++c) stats.mu[static_cast<size_t>(c)] += m(r, c);
  for (auto& mu : stats.mu) mu /= static_cast<double>(count);
  for (const Matrix& m : train_features)
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double d = m(r, c) - stats.mu[static_cast<size_t>(c)];
        stats.sigma[static_cast<size_t>(c)] += d * d;
      }
  for (int c = 0; c < cols; ++c) {
    stats.sigma[static_cast<size_t>(c)] =
        std::sqrt(stats.sigma[static_cast<size_t>(c)] / static_cast<double>(count));
    if (stats.sigma[static_cast<size_t>(c)] < 1e-12) {
      stats.degenerate_features.push_back(c);
      warn(log, "DegenerateFeature: column " + std::to_string(c) + " is constant on the training fold");
    }
  }
  return stats;
}

Matrix apply_scaler(const Matrix& features, const ScalerStats& stats) {
  Matrix out = features;
  for (int c = 0; c < features.cols; ++c) {
    double mu = stats.mu[static_cast<size_t>(c)];
    double sigma = stats.sigma[static_cast<size_t>(c)];
    for (int r = 0; r < features.rows; ++r)
      out(r, c) = sigma < 1e-12 ? 0.0 : (features(r, c) - mu) / sigma;
  }
  return out;
}

}  // namespace eegraph
