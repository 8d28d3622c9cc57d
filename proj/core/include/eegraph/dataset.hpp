#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eegraph/error.hpp"
#include "eegraph/matrix.hpp"

namespace eegraph {

// ---------------------------------------------------------------------------
// Experimental tasks and montage
// ---------------------------------------------------------------------------

enum class Task { EC, EO, H, C, S, F, M, ET, R };

constexpr int kNumTasks = 9;
constexpr int kNumChannels = 19;
constexpr double kDefaultSampleRate = 250.0;

const std::array<Task, kNumTasks>& all_tasks();
const char* task_name(Task t);
std::optional<Task> task_from_name(const std::string& name);

/// ET runs twice as long as every other task.
double task_duration_s(Task t);

/// Fixed 10-20 channel order; data columns are positional.
const std::array<const char*, kNumChannels>& channel_names();
int channel_index(const std::string& name);  // -1 when unknown

enum class Label { NotAddicted = 0, Addicted = 1 };
const char* label_name(Label l);

// ---------------------------------------------------------------------------
// Core data carriers
// ---------------------------------------------------------------------------

struct Recording {
  std::string subject_id;
  Task task = Task::EC;
  double sample_rate_hz = kDefaultSampleRate;
  Matrix data;  // n_samples x 19, microvolts
  std::vector<std::string> channels;

  int n_samples() const { return data.rows; }
  double duration_s() const { return data.rows / sample_rate_hz; }
};

struct SubjectLabel {
  std::string subject_id;
  Label label = Label::NotAddicted;
  std::optional<std::string> gender;  // metadata only, never a feature
};

struct Dataset {
  std::vector<SubjectLabel> labels;  // ordered by numeric subject index
  std::map<std::string, std::map<Task, Recording>> recordings;

  const Recording& get(const std::string& subject, Task t) const;
  Label label_of(const std::string& subject) const;
  std::vector<std::string> subject_ids() const;
  int n_recordings() const;
};

/// Overrides for synthetic trees whose recordings are shorter or slower
/// than the published layout. Serialized as dataset.json next to labels.csv.
struct DatasetLayout {
  double sample_rate_hz = kDefaultSampleRate;
  double base_duration_s = 60.0;  // ET always runs 2x this
  double expected_duration_s(Task t) const {
    return t == Task::ET ? 2.0 * base_duration_s : base_duration_s;
  }
  int expected_rows(Task t) const {
    return static_cast<int>(expected_duration_s(t) * sample_rate_hz + 0.5);
  }
};

// ---------------------------------------------------------------------------
// Loading / writing
// ---------------------------------------------------------------------------

/// Loads `<root>/S<k>/<TASK>.csv` plus `<root>/labels.csv`. Validates the
/// grid (every subject has all nine tasks), column count, and row count
/// against the layout (published defaults, or dataset.json when present).
Dataset load_dataset(const std::filesystem::path& root, WarningLog* log = nullptr);

/// Writes a dataset in the same tree layout, including labels.csv and a
/// dataset.json layout manifest. Values are printed so reloads are bit-exact.
void save_dataset(const Dataset& ds, const std::filesystem::path& root);

void write_recording_csv(const Recording& rec, const std::filesystem::path& path);

struct SubjectRow {
  std::string subject_id;
  std::optional<std::string> gender;
  Label label;
};
std::vector<SubjectRow> subject_table(const Dataset& ds);

// ---------------------------------------------------------------------------
// Synthetic recordings (test oracle source)
// ---------------------------------------------------------------------------

/// One sinusoidal component: per-channel amplitude and phase at a shared
/// frequency. Channels with amplitude 0 do not carry the component.
struct SynthComponent {
  double freq_hz = 10.0;
  std::array<double, kNumChannels> amp{};    // zero-initialized
  std::array<double, kNumChannels> phase{};  // radians

  static SynthComponent uniform(double freq_hz, double amp, double phase = 0.0);
  static SynthComponent on_channels(double freq_hz,
                                    const std::vector<std::pair<int, double>>& channel_amps,
                                    double phase = 0.0);
};

struct SynthSpec {
  std::vector<SynthComponent> components;
  double noise_sd = 0.0;
  double duration_s = 60.0;
  double sample_rate_hz = kDefaultSampleRate;
  uint64_t seed = 0;
};

/// Pure function of its spec: channel c = sum of sinusoids + Gaussian noise.
Recording synth_recording(const std::string& subject_id, Task task, const SynthSpec& spec);

}  // namespace eegraph
