#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace pamcurate::cli {

/// Everything a stage needs to run. Persisted verbatim (with absolute
/// paths) in every run record so a run can be replayed.
struct RunConfig {
  std::filesystem::path deployment;
  std::vector<std::filesystem::path> ais;
  std::vector<std::filesystem::path> shards;
  std::filesystem::path out;

  std::optional<std::uint64_t> seed;
  double side_km = 4.0;
  std::optional<std::uint64_t> threshold;
  double knee_sensitivity = 1.0;
  std::vector<std::uint32_t> levels{6000, 400, 40, 10};
  std::uint64_t target_n = 323532;
  unsigned workers = 1;

  std::size_t batch_size = 4096;
  std::uint32_t passes = 2;
  std::uint32_t resample_rounds = 3;
  std::uint64_t resample_size = 0;

  /// Relative paths are resolved against `base_dir`. A run record is
  /// accepted too: its "config" member is used.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  nlohmann::ordered_json to_json() const;

  /// Throws UsageError when the seed is missing or a parameter is out of
  /// range.
  void validate() const;
};

/// Bad invocation or configuration (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or unreadable input (exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint32_t> parse_levels_csv(const std::string& text);

}  // namespace pamcurate::cli
