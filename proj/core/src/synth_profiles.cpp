#include "eegraph/synth_profiles.hpp"

#include <cmath>
#include <numbers>

#include "eegraph/rng.hpp"

namespace eegraph {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Canonical 7/7 assignment for the 14-subject cohort.
bool canonical_addicted(int idx1) {
  switch (idx1) {
    case 1:
    case 5:
    case 6:
    case 9:
    case 10:
    case 11:
    case 14:
      return true;
    default:
      return false;
  }
}

SynthComponent with_phases(SynthComponent c, Rng& rng) {
  for (int i = 0; i < kNumChannels; ++i) {
    if (c.amp[i] != 0.0) c.phase[i] = rng.uniform() * kTwoPi;
  }
  return c;
}

}  // namespace

PlantedChannels planted_channels() {
  return {channel_index("Fz"), channel_index("Cz"), channel_index("T7")};
}

Label synthetic_label(int subject_index, int n_subjects) {
  if (n_subjects == 14) {
    return canonical_addicted(subject_index) ? Label::Addicted : Label::NotAddicted;
  }
  return subject_index % 2 == 0 ? Label::Addicted : Label::NotAddicted;
}

DatasetLayout synthetic_layout(const SynthConfig& cfg) {
  DatasetLayout layout;
  layout.sample_rate_hz = cfg.sample_rate_hz;
  layout.base_duration_s = cfg.base_duration_s;
  return layout;
}

Dataset build_synthetic_dataset(const SynthConfig& cfg) {
  if (cfg.n_subjects < 4) throw Error(Errc::invalid_spec, "synthetic cohort needs >= 4 subjects");
  if (cfg.profile != "planted" && cfg.profile != "null") {
    throw Error(Errc::invalid_spec, "unknown synth profile: " + cfg.profile);
  }
  const bool planted = cfg.profile == "planted";
  const PlantedChannels ch = planted_channels();

  Dataset ds;
  for (int s = 1; s <= cfg.n_subjects; ++s) {
    const std::string sid = "S" + std::to_string(s);
    const Label label = synthetic_label(s, cfg.n_subjects);
    ds.labels.push_back({sid, label, std::nullopt});

    // Per-subject amplitude jitter keeps subjects distinguishable without
    // touching class separability.
    Rng subject_rng(Rng::derive(cfg.seed, 0x5000 + static_cast<uint64_t>(s)));
    const double jitter = 1.0 + 0.1 * (2.0 * subject_rng.uniform() - 1.0);

    const bool strong = planted && label == Label::Addicted;
    for (int t = 0; t < kNumTasks; ++t) {
      const Task task = all_tasks()[static_cast<size_t>(t)];
      Rng rec_rng(Rng::derive(cfg.seed, (static_cast<uint64_t>(s) << 8) | static_cast<uint64_t>(t)));

      SynthSpec spec;
      spec.noise_sd = cfg.noise_sd;
      spec.sample_rate_hz = cfg.sample_rate_hz;
      spec.duration_s = task == Task::ET ? 2.0 * cfg.base_duration_s : cfg.base_duration_s;
      spec.seed = Rng::derive(cfg.seed, (static_cast<uint64_t>(s) << 16) | (static_cast<uint64_t>(t) << 1) | 1u);

      // Shared 10 Hz background on every channel.
      spec.components.push_back(with_phases(SynthComponent::uniform(10.0, 0.8 * jitter), rec_rng));

      // 20 Hz rhythm on Fz/Cz: elevated for the planted class, weak otherwise.
      const double beta_amp = (strong ? 1.7 : 0.4) * jitter;
      spec.components.push_back(
          with_phases(SynthComponent::on_channels(20.0, {{ch.fz, beta_amp}, {ch.cz, beta_amp}}), rec_rng));

      // 6 Hz pair on Cz-T7.
      const double pair_amp = 2.0 * jitter;
      if (strong) {
        // Same frequency and a fixed lag: phase difference is locked.
        SynthComponent locked = SynthComponent::on_channels(6.0, {{ch.cz, pair_amp}, {ch.t7, pair_amp}});
        const double base_phase = rec_rng.uniform() * kTwoPi;
        locked.phase[static_cast<size_t>(ch.cz)] = base_phase;
        locked.phase[static_cast<size_t>(ch.t7)] = base_phase - 1.1;
        spec.components.push_back(locked);
      } else {
        // Slightly detuned frequencies: the phase difference drifts, so
        // there is nothing to lock onto.
        spec.components.push_back(
            with_phases(SynthComponent::on_channels(6.0, {{ch.cz, pair_amp}}), rec_rng));
        spec.components.push_back(
            with_phases(SynthComponent::on_channels(6.6, {{ch.t7, pair_amp}}), rec_rng));
      }

      ds.recordings[sid][task] = synth_recording(sid, task, spec);
    }
  }
  return ds;
}

void write_synthetic_dataset(const SynthConfig& cfg, const std::filesystem::path& root) {
  save_dataset(build_synthetic_dataset(cfg), root);
}

}  // namespace eegraph
