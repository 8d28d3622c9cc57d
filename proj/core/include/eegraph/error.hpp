#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace eegraph {

enum class Errc {
  missing_file,
  file_not_found,
  shape_mismatch,
  non_numeric_cell,
  label_mismatch,
  frequency_out_of_range,
  invalid_spec,
  unstable_filter,
  window_too_long,
  plan_mismatch,
  segment_too_long,
  length_mismatch,
  class_missing,
  nan_gradient,
  unknown_key,
  bad_value_type,
  checkpoint_not_found,
  internal,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::missing_file: return "MissingFile";
    case Errc::file_not_found: return "FileNotFound";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::non_numeric_cell: return "NonNumericCell";
    case Errc::label_mismatch: return "LabelMismatch";
    case Errc::frequency_out_of_range: return "FrequencyOutOfRange";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::unstable_filter: return "UnstableFilter";
    case Errc::window_too_long: return "WindowTooLong";
    case Errc::plan_mismatch: return "PlanMismatch";
    case Errc::segment_too_long: return "SegmentTooLong";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::class_missing: return "ClassMissing";
    case Errc::nan_gradient: return "NaNGradient";
    case Errc::unknown_key: return "UnknownKey";
    case Errc::bad_value_type: return "TypeError";
    case Errc::checkpoint_not_found: return "CheckpointNotFound";
    case Errc::internal: return "Internal";
  }
  return "Unknown";
}

/// Single exception type for the whole library; the code identifies the
/// failure class and the message carries the specifics (file, key, index).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Non-fatal diagnostics (degenerate channels, zero denominators, ...).
/// Callers that do not care pass nullptr.
struct WarningLog {
  std::vector<std::string> items;
  void add(std::string msg) { items.push_back(std::move(msg)); }
  bool empty() const { return items.empty(); }
};

inline void warn(WarningLog* log, const std::string& msg) {
  if (log) log->add(msg);
}

}  // namespace eegraph
