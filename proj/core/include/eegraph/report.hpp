#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eegraph/config.hpp"
#include "eegraph/evaluation.hpp"

namespace eegraph {

const char* library_version();

/// Provenance record for one subcommand run. Timings live here and only
/// here: every other artifact is bit-reproducible for a fixed config, seed
/// list, and thread count.
struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  int threads = 1;
  double wall_seconds = 0.0;
  std::vector<std::string> artifacts;  // relative to the run directory
};

/// Atomic write (tmp + rename in the target directory).
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// manifest.json under dir.
void write_manifest(const RunManifest& m, const std::filesystem::path& dir);

std::string run_report_json(const RunReport& rep, const RunConfig& cfg);

/// One row per seed x fold.
std::string metrics_csv(const RunReport& rep);

/// run_report.json, metrics.csv, and config.json under dir; returns the
/// artifact names written.
std::vector<std::string> write_run_artifacts(const RunReport& rep, const RunConfig& cfg,
                                             const std::filesystem::path& dir);

/// Merges whatever run directories exist under out_dir (loso/, ablate_*/,
/// baseline_*/, graphs/, group_stats/, explain/) into one summary placing
/// measured values next to the published reference numbers. Missing runs
/// are listed under "missing", never fatal.
std::string summary_json(const std::filesystem::path& out_dir);

/// summary.json under out_dir.
void write_summary(const std::filesystem::path& out_dir);

}  // namespace eegraph
