#pragma once

#include <string>
#include <vector>

#include "eegraph/error.hpp"
#include "eegraph/preprocess.hpp"

namespace eegraph {

// ---------------------------------------------------------------------------
// Spectral bands
// ---------------------------------------------------------------------------

struct BandDef {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
};

/// Delta, Theta, Alpha, Beta, Gamma over 0.5-45 Hz.
const std::vector<BandDef>& standard_bands();
constexpr int kNumBands = 5;

// Node feature columns: 5 band powers, then activity, mobility, complexity,
// mean amplitude.
constexpr int kNumNodeFeatures = 9;
const std::vector<std::string>& node_feature_names();

// ---------------------------------------------------------------------------
// Welch PSD
// ---------------------------------------------------------------------------

struct WelchSpec {
  int segment_len_samples = 250;
  double overlap_fraction = 0.5;  // in [0, 1)
};

struct Psd {
  std::vector<double> freqs;  // Hz
  std::vector<double> psd;    // one-sided density, units^2/Hz
};

/// Hann-windowed averaged periodogram with per-segment mean removal.
/// The one-sided density integrates to roughly the signal variance.
Psd welch_psd(const std::vector<double>& x, double sample_rate_hz, const WelchSpec& spec);

/// Trapezoidal integration of the PSD over each band, with linear
/// interpolation at band edges that fall between grid points.
std::vector<double> band_powers(const Psd& p, const std::vector<BandDef>& bands);

double integrate_psd(const Psd& p, double low_hz, double high_hz);

// ---------------------------------------------------------------------------
// Hjorth descriptors
// ---------------------------------------------------------------------------

struct HjorthFeatures {
  double activity = 0.0;        // variance
  double mobility = 0.0;        // sd(diff x) / sd(x)
  double complexity = 0.0;      // mobility(diff x) / mobility(x)
  double mean_amplitude = 0.0;  // mean |x|
};

HjorthFeatures hjorth(const std::vector<double>& x);

// ---------------------------------------------------------------------------
// Per-window node features
// ---------------------------------------------------------------------------

/// One 19x9 matrix per window: band powers then Hjorth descriptors.
std::vector<Matrix> extract_node_features(const WindowedRecording& w, double sample_rate_hz,
                                          const WelchSpec& spec);

// ---------------------------------------------------------------------------
// Train-side feature standardization
// ---------------------------------------------------------------------------

struct ScalerStats {
  std::vector<double> mu;     // per feature column
  std::vector<double> sigma;  // population SD per column
  std::vector<int> degenerate_features;
};

/// Fit on training-fold windows only.
ScalerStats fit_feature_scaler(const std::vector<Matrix>& train_features,
                               WarningLog* log = nullptr);

Matrix apply_scaler(const Matrix& features, const ScalerStats& stats);

}  // namespace eegraph
