#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace pamcurate::cli {

// Stage outputs inside the --out directory. Later stages read earlier
// stages' outputs from the same directory.
inline constexpr const char* kAlignedSidecar = "aligned_windows.csv";
inline constexpr const char* kAlignedPulses = "aligned_pulses.csv";
inline constexpr const char* kAlignStats = "align_stats.json";
inline constexpr const char* kAisManifest = "ais_manifest.jsonl";
inline constexpr const char* kCurateStats = "curate_ais_stats.json";
inline constexpr const char* kModel = "model.pamhkm";
inline constexpr const char* kFitStats = "fit_stats.json";
inline constexpr const char* kCheckpoint = "selection.ckpt";
inline constexpr const char* kHkmeansManifest = "hkmeans_manifest.jsonl";
inline constexpr const char* kSampleStats = "sample_stats.json";
inline constexpr const char* kManifest = "manifest.jsonl";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kOccurrence = "occurrence.csv";
inline constexpr const char* kStats = "stats.json";

void cmd_align(const RunConfig& config, std::ostream& log);
void cmd_curate_ais(const RunConfig& config, std::ostream& log);
void cmd_fit(const RunConfig& config, std::ostream& log);
void cmd_sample(const RunConfig& config, std::ostream& log);
void cmd_assemble(const RunConfig& config, std::ostream& log);
void cmd_stats(const RunConfig& config, std::ostream& log);

const std::vector<std::string>& subcommands();

/// Runs one subcommand and maps failures to exit codes:
/// 0 ok, 1 usage/validation, 2 input/parse, 3 degenerate data, 4 other.
int run_command(const std::string& subcommand, const RunConfig& config, std::ostream& log);

/// Path of the run record a stage writes.
std::filesystem::path run_record_path(const RunConfig& config, const std::string& subcommand);

}  // namespace pamcurate::cli
