#include "eegraph/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace eegraph {

FilterSpec FilterSpec::bandpass(double low_hz, double high_hz, int order) {
  FilterSpec s;
  s.kind = Kind::BandpassButterworth;
  s.low_hz = low_hz;
  s.high_hz = high_hz;
  s.order = order;
  return s;
}

FilterSpec FilterSpec::notch(double center_hz, double q) {
  FilterSpec s;
  s.kind = Kind::Notch;
  s.center_hz = center_hz;
  s.q_factor = q;
  return s;
}

namespace {

using cplx = std::complex<double>;

Biquad section_from_pole_pair(cplx z1, cplx z2, double b0, double b1, double b2) {
  Biquad s;
  s.b0 = b0;
  s.b1 = b1;
  s.b2 = b2;
  s.a1 = -(z1 + z2).real();
  s.a2 = (z1 * z2).real();
  return s;
}

double section_dc_gain(const Biquad& s) {
  double den = 1.0 + s.a1 + s.a2;
  if (den == 0.0) return 0.0;
  return (s.b0 + s.b1 + s.b2) / den;
}

// Steady-state filter state for a unit-amplitude constant input (DF2T).
void section_zi(const Biquad& s, double& z0, double& z1) {
  double g = section_dc_gain(s);
  z0 = g - s.b0;
  z1 = s.b2 - s.a2 * g;
}

void sosfilt_inplace(const std::vector<Biquad>& sections, std::vector<double>& x) {
  if (x.empty()) return;
  double scale = x[0];
  for (const Biquad& s : sections) {
    double z0, z1;
    section_zi(s, z0, z1);
    z0 *= scale;
    z1 *= scale;
    for (double& xi : x) {
      double y = s.b0 * xi + z0;
      z0 = s.b1 * xi - s.a1 * y + z1;
      z1 = s.b2 * xi - s.a2 * y;
      xi = y;
    }
    scale *= section_dc_gain(s);
  }
}

SosFilter design_bandpass(const FilterSpec& spec, double fs) {
  if (spec.order < 1)
    throw Error(Errc::invalid_spec, "bandpass order must be >= 1");
  if (!(spec.low_hz > 0.0 && spec.low_hz < spec.high_hz && spec.high_hz < fs / 2.0))
    throw Error(Errc::invalid_spec,
                "bandpass requires 0 < low < high < sample_rate/2, got [" +
                    std::to_string(spec.low_hz) + ", " + std::to_string(spec.high_hz) +
                    "] at " + std::to_string(fs) + " Hz");

  const int n = spec.order;
  const double fs2 = 2.0 * fs;
  // Bilinear pre-warp.
  const double w1 = fs2 * std::tan(M_PI * spec.low_hz / fs);
  const double w2 = fs2 * std::tan(M_PI * spec.high_hz / fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  // Analog Butterworth prototype poles on the unit circle, left half plane.
  std::vector<cplx> proto;
  for (int k = 1; k <= n; ++k) {
    double theta = M_PI * (2.0 * k + n - 1.0) / (2.0 * n);
    proto.emplace_back(std::cos(theta), std::sin(theta));
  }

  auto bilinear = [fs2](cplx s) { return (fs2 + s) / (fs2 - s); };

  // Lowpass -> bandpass doubles the pole count; each prototype pole p maps
  // to the two roots of s^2 - (bw p) s + w0^2 = 0.
  std::vector<Biquad> sections;
  auto add_pair = [&](cplx s_a, cplx s_b) {
    cplx za = bilinear(s_a);
    cplx zb = bilinear(s_b);
    if (std::abs(za) >= 1.0 || std::abs(zb) >= 1.0)
      throw Error(Errc::unstable_filter,
                  "digital pole magnitude >= 1 after bandpass design");
    // One zero at z=1 and one at z=-1 per section: numerator 1 - z^-2.
    sections.push_back(section_from_pole_pair(za, zb, 1.0, 0.0, -1.0));
  };

  for (const cplx& p : proto) {
    if (p.imag() < -1e-12) continue;  // conjugates are implied
    cplx bp_half = bw * p / 2.0;
    cplx disc = std::sqrt(bp_half * bp_half - cplx(w0 * w0, 0.0));
    cplx s1 = bp_half + disc;
    cplx s2 = bp_half - disc;
    if (p.imag() > 1e-12) {
      // Complex prototype pole: each bandpass root pairs with its own conjugate.
      add_pair(s1, std::conj(s1));
      add_pair(s2, std::conj(s2));
    } else {
      // Real prototype pole (odd order): the two roots form one section.
      add_pair(s1, s2);
    }
  }

  SosFilter filt(std::move(sections), fs);

  // Normalize so the passband center has unit gain: the analog center w0
  // maps through the bilinear transform to this digital frequency.
  double f_center = std::atan(w0 / fs2) * fs / M_PI;
  double mag = std::abs(filt.response(f_center));
  if (!(mag > 0.0))
    throw Error(Errc::unstable_filter, "bandpass design has zero center gain");
  double g = std::pow(1.0 / mag, 1.0 / static_cast<double>(filt.sections().size()));
  std::vector<Biquad> scaled = filt.sections();
  for (Biquad& s : scaled) {
    s.b0 *= g;
    s.b1 *= g;
    s.b2 *= g;
  }
  return SosFilter(std::move(scaled), fs);
}

SosFilter design_notch(const FilterSpec& spec, double fs) {
  if (!(spec.center_hz > 0.0 && spec.center_hz < fs / 2.0))
    throw Error(Errc::invalid_spec, "notch center must lie below Nyquist");
  if (!(spec.q_factor > 0.0))
    throw Error(Errc::invalid_spec, "notch Q must be positive");

  double w0 = 2.0 * M_PI * spec.center_hz / fs;
  double alpha = std::sin(w0) / (2.0 * spec.q_factor);
  double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * std::cos(w0) / a0;
  s.a2 = (1.0 - alpha) / a0;
  return SosFilter({s}, fs);
}

}  // namespace

SosFilter SosFilter::design(const FilterSpec& spec, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0))
    throw Error(Errc::invalid_spec, "sample rate must be positive");
  if (spec.kind == FilterSpec::Kind::BandpassButterworth)
    return design_bandpass(spec, sample_rate_hz);
  return design_notch(spec, sample_rate_hz);
}

std::complex<double> SosFilter::response(double freq_hz) const {
  double w = 2.0 * M_PI * freq_hz / sample_rate_;
  cplx z1(std::cos(-w), std::sin(-w));
  cplx z2 = z1 * z1;
  cplx h(1.0, 0.0);
  for (const Biquad& s : sections_) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

std::vector<double> SosFilter::filter_once(const std::vector<double>& x) const {
  std::vector<double> y = x;
  sosfilt_inplace(sections_, y);
  return y;
}

std::vector<double> SosFilter::filtfilt(const std::vector<double>& x) const {
  const int n = static_cast<int>(x.size());
  if (n == 0) return {};
  int padlen = std::min(3 * pole_count(), n - 1);

  std::vector<double> ext;
  ext.reserve(static_cast<size_t>(n + 2 * padlen));
  for (int i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[static_cast<size_t>(i)]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (int i = 1; i <= padlen; ++i)
    ext.push_back(2.0 * x[static_cast<size_t>(n - 1)] - x[static_cast<size_t>(n - 1 - i)]);

  sosfilt_inplace(sections_, ext);
  std::reverse(ext.begin(), ext.end());
  sosfilt_inplace(sections_, ext);
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + padlen, ext.begin() + padlen + n);
}

namespace {

Recording apply_filter(const Recording& rec, const SosFilter& filt) {
  Recording out = rec;
  for (int c = 0; c < rec.data.cols; ++c) {
    std::vector<double> chan = rec.data.column(c);
    out.data.set_column(c, filt.filtfilt(chan));
  }
  return out;
}

}  // namespace

Recording bandpass(const Recording& rec, const FilterSpec& spec) {
  return apply_filter(rec, SosFilter::design(spec, rec.sample_rate_hz));
}

Recording notch(const Recording& rec, double center_hz, double q) {
  return apply_filter(rec, SosFilter::design(FilterSpec::notch(center_hz, q), rec.sample_rate_hz));
}

std::pair<Recording, ZScoreStats> zscore(const Recording& rec, WarningLog* log) {
  Recording out = rec;
  ZScoreStats stats;
  const int n = rec.data.rows;
  stats.mu.resize(static_cast<size_t>(rec.data.cols));
  stats.sigma.resize(static_cast<size_t>(rec.data.cols));
  for (int c = 0; c < rec.data.cols; ++c) {
    double mu = 0.0;
    for (int i = 0; i < n; ++i) mu += rec.data(i, c);
    mu /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = rec.data(i, c) - mu;
      var += d * d;
    }
    double sigma = std::sqrt(var / n);  // population SD
    stats.mu[static_cast<size_t>(c)] = mu;
    stats.sigma[static_cast<size_t>(c)] = sigma;
    if (sigma < 1e-12) {
      stats.degenerate_channels.push_back(c);
      warn(log, "DegenerateChannel: " + rec.subject_id + "/" + task_name(rec.task) +
                    " channel " + std::to_string(c) + " has zero variance");
      for (int i = 0; i < n; ++i) out.data(i, c) = 0.0;
    } else {
      for (int i = 0; i < n; ++i) out.data(i, c) = (rec.data(i, c) - mu) / sigma;
    }
  }
  return {std::move(out), std::move(stats)};
}

WindowPlan plan_windows(int n_samples, double sample_rate_hz, int target_count,
                        double window_len_s) {
  if (target_count < 1)
    throw Error(Errc::invalid_spec, "window count must be >= 1");
  int len = static_cast<int>(window_len_s * sample_rate_hz + 0.5);
  if (len < 1)
    throw Error(Errc::invalid_spec, "window length must cover at least one sample");
  if (len > n_samples)
    throw Error(Errc::window_too_long,
                "window of " + std::to_string(len) + " samples does not fit in " +
                    std::to_string(n_samples));
  WindowPlan plan;
  plan.window_len_samples = len;
  plan.count = target_count;
  if (target_count == 1) {
    plan.stride_samples = 1;  // unused; keeps the stride invariant
    return plan;
  }
  plan.stride_samples = (n_samples - len) / (target_count - 1);
  if (plan.stride_samples < 1)
    throw Error(Errc::window_too_long,
                std::to_string(target_count) + " windows of " + std::to_string(len) +
                    " samples do not fit in " + std::to_string(n_samples));
  return plan;
}

WindowedRecording windowize(const Recording& rec, const WindowPlan& plan) {
  if (plan.count < 1 || plan.window_len_samples < 1)
    throw Error(Errc::plan_mismatch, "empty window plan");
  long last = static_cast<long>(plan.count - 1) * plan.stride_samples + plan.window_len_samples;
  if (last > rec.data.rows)
    throw Error(Errc::plan_mismatch,
                "plan needs " + std::to_string(last) + " samples, recording has " +
                    std::to_string(rec.data.rows));

  WindowedRecording out;
  out.plan = plan;
  out.subject_id = rec.subject_id;
  out.task = rec.task;
  out.windows.reserve(static_cast<size_t>(plan.count));
  for (int w = 0; w < plan.count; ++w) {
    Matrix win(plan.window_len_samples, rec.data.cols);
    int offset = w * plan.stride_samples;
    for (int i = 0; i < plan.window_len_samples; ++i)
      for (int c = 0; c < rec.data.cols; ++c) win(i, c) = rec.data(offset + i, c);
    out.windows.push_back(std::move(win));
  }
  return out;
}

PreprocessResult preprocess_recording(const Recording& rec, const PreprocessConfig& cfg,
                                      WarningLog* log) {
  PreprocessResult result;
  Recording filtered =
      bandpass(rec, FilterSpec::bandpass(cfg.bandpass_low_hz, cfg.bandpass_high_hz,
                                         cfg.bandpass_order));
  filtered = notch(filtered, cfg.notch_center_hz, cfg.notch_q);
  auto [normalized, stats] = zscore(filtered, log);
  result.stats = std::move(stats);
  WindowPlan plan = plan_windows(normalized.n_samples(), normalized.sample_rate_hz,
                                 cfg.window_count, cfg.window_length_s);
  result.windows = windowize(normalized, plan);
  result.filtered = std::move(normalized);
  return result;
}

}  // namespace eegraph
