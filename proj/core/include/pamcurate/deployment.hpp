#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pamcurate/types.hpp"

namespace pamcurate {

/// Hydrophones and their recordings, loaded from a JSON document:
///
///   {"hydrophones": [{"id": "H1", "lat": 36.7, "lon": -122.0,
///     "recordings": [{"id": "R1", "start": "2023-01-01T00:00:00",
///                     "duration_s": 3600, "sample_rate_hz": 48000}]}]}
struct DeploymentConfig {
  std::vector<Hydrophone> hydrophones;

  /// Throws ValidationError on empty/duplicate ids, overlapping recordings
  /// or out-of-range values. Sorts recordings by start.
  void validate();

  const Hydrophone* find(const std::string& hydrophone_id) const;

  std::int64_t total_seconds() const;
  std::int64_t total_windows() const;

  /// Calls `visit` for every complete window, hydrophone by hydrophone.
  void for_each_window(const std::function<void(const AudioWindow&)>& visit) const;

  static DeploymentConfig parse(const std::string& json_text);
  static DeploymentConfig load(const std::filesystem::path& path);
  std::string to_json() const;

  friend bool operator==(const DeploymentConfig&, const DeploymentConfig&) = default;
};

/// Looks up the window metadata of the requested ids by enumerating the
/// deployment once. Ids not present in the deployment are absent from the
/// result.
std::unordered_map<WindowId, AudioWindow> resolve_windows(
    const DeploymentConfig& config, const std::unordered_set<WindowId>& wanted);

/// Returns the first pair of distinct windows sharing an id, if any.
std::optional<std::pair<AudioWindow, AudioWindow>> find_window_id_collision(
    const DeploymentConfig& config);

}  // namespace pamcurate
