#pragma once

#include <filesystem>

#include "eegraph/config.hpp"
#include "eegraph/dataset.hpp"

namespace eegraph {

// ---------------------------------------------------------------------------
// Synthetic cohort builders
// ---------------------------------------------------------------------------
//
// Two profiles, both deterministic functions of SynthConfig:
//
//   planted  One class carries an elevated 20 Hz rhythm on Fz/Cz plus a
//            phase-locked 6 Hz pair on Cz-T7 (fixed lag). The other class
//            gets a weak 20 Hz rhythm and an incoherent 6 Hz pair (the two
//            channels run at slightly different frequencies, so their phase
//            difference drifts). A shared 10 Hz background and white noise
//            sit on every channel.
//
//   null     Every subject draws from the second generator above, so there
//            is no group difference to find. Labels are still assigned.

/// Channels that carry the planted signals (montage indices).
struct PlantedChannels {
  int fz;
  int cz;
  int t7;
};
PlantedChannels planted_channels();

/// Label assignment used by the builders: for a 14-subject cohort the
/// canonical 7/7 split, otherwise alternating (even index -> Addicted).
Label synthetic_label(int subject_index, int n_subjects);

/// Full cohort: n_subjects x 9 tasks, ET at twice the base duration.
Dataset build_synthetic_dataset(const SynthConfig& cfg);

DatasetLayout synthetic_layout(const SynthConfig& cfg);

/// build + save_dataset + dataset.json layout manifest under root.
void write_synthetic_dataset(const SynthConfig& cfg, const std::filesystem::path& root);

}  // namespace eegraph
