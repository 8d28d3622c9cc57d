#pragma once

#include <complex>
#include <string>
#include <vector>

#include "eegraph/dataset.hpp"
#include "eegraph/error.hpp"

namespace eegraph {

// ---------------------------------------------------------------------------
// IIR filters
// ---------------------------------------------------------------------------

struct FilterSpec {
  enum class Kind { BandpassButterworth, Notch };
  Kind kind = Kind::BandpassButterworth;

  // Bandpass parameters. `order` is the analog prototype order; the digital
  // bandpass realization carries 2*order poles.
  int order = 4;
  double low_hz = 0.5;
  double high_hz = 45.0;

  // Notch parameters.
  double center_hz = 50.0;
  double q_factor = 30.0;

  static FilterSpec bandpass(double low_hz, double high_hz, int order = 4);
  static FilterSpec notch(double center_hz, double q = 30.0);
};

/// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

/// Cascade of second-order sections bound to a sample rate.
class SosFilter {
 public:
  SosFilter() = default;
  SosFilter(std::vector<Biquad> sections, double sample_rate_hz)
      : sections_(std::move(sections)), sample_rate_(sample_rate_hz) {}

  static SosFilter design(const FilterSpec& spec, double sample_rate_hz);

  /// Zero-phase forward-backward pass with odd-reflection padding of
  /// 3x the pole count and steady-state initial conditions.
  std::vector<double> filtfilt(const std::vector<double>& x) const;

  /// Single causal pass from steady-state initial conditions (used by the
  /// response-measurement tests; filtfilt squares the magnitude response).
  std::vector<double> filter_once(const std::vector<double>& x) const;

  /// Complex frequency response of the single-pass cascade.
  std::complex<double> response(double freq_hz) const;

  int pole_count() const { return 2 * static_cast<int>(sections_.size()); }
  const std::vector<Biquad>& sections() const { return sections_; }
  double sample_rate_hz() const { return sample_rate_; }

 private:
  std::vector<Biquad> sections_;
  double sample_rate_ = 0.0;
};

Recording bandpass(const Recording& rec, const FilterSpec& spec);
Recording notch(const Recording& rec, double center_hz, double q = 30.0);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

struct ZScoreStats {
  std::vector<double> mu;     // per channel, microvolts
  std::vector<double> sigma;  // population SD, microvolts
  std::vector<int> degenerate_channels;
};

/// Per-channel standardization with population SD. Channels with
/// sigma < 1e-12 become all zeros and are reported in the stats and log.
std::pair<Recording, ZScoreStats> zscore(const Recording& rec, WarningLog* log = nullptr);

// ---------------------------------------------------------------------------
// Windowing
// ---------------------------------------------------------------------------

struct WindowPlan {
  int window_len_samples = 0;
  int stride_samples = 0;
  int count = 0;
};

/// Fixed-count plan: stride = floor((n - len) / (count - 1)), so the windows
/// span the recording (gaps appear when the recording is longer than
/// count * len).
WindowPlan plan_windows(int n_samples, double sample_rate_hz, int target_count,
                        double window_len_s);

struct WindowedRecording {
  std::vector<Matrix> windows;  // each window_len x 19
  WindowPlan plan;
  std::string subject_id;
  Task task = Task::EC;
};

WindowedRecording windowize(const Recording& rec, const WindowPlan& plan);

// ---------------------------------------------------------------------------
// Whole chain
// ---------------------------------------------------------------------------

struct PreprocessConfig {
  double bandpass_low_hz = 0.5;
  double bandpass_high_hz = 45.0;
  int bandpass_order = 4;
  double notch_center_hz = 50.0;
  double notch_q = 30.0;
  int window_count = 30;
  double window_length_s = 2.0;
};

struct PreprocessResult {
  Recording filtered;  // bandpass -> notch -> zscore
  ZScoreStats stats;
  WindowedRecording windows;
};

/// bandpass -> notch -> z-score -> windowize.
PreprocessResult preprocess_recording(const Recording& rec, const PreprocessConfig& cfg,
                                      WarningLog* log = nullptr);

}  // namespace eegraph
