#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pamcurate/types.hpp"

namespace pamcurate {

struct HydrophoneCounts {
  std::uint64_t ais = 0;
  std::uint64_t hkmeans = 0;

  friend bool operator==(const HydrophoneCounts&, const HydrophoneCounts&) = default;
};

struct AssemblySummary {
  std::uint64_t ais_entries = 0;      // entries with source=ais after the union
  std::uint64_t hkmeans_entries = 0;  // entries with source=hkmeans after the union
  std::uint64_t overlap = 0;          // windows present in both inputs
  std::uint64_t total_entries = 0;
  double total_hours = 0.0;           // total_entries * 10 s / 3600
  std::map<std::string, HydrophoneCounts> per_hydrophone;

  std::string to_json() const;
};

struct Assembly {
  CurationManifest manifest;
  AssemblySummary summary;
};

/// Union of the AIS-curated and cluster-curated entries keyed by window_id.
/// On collision the AIS entry wins and inherits the cluster_path. Throws
/// ValidationError on duplicates inside one input or on a source tag that
/// does not match its input.
Assembly assemble(std::vector<ManifestEntry> ais_entries,
                  std::vector<ManifestEntry> hkmeans_entries);

/// Hours of audio covered by `entries` windows.
double manifest_hours(std::uint64_t entries);

AssemblySummary summarize(const CurationManifest& manifest, std::uint64_t overlap = 0);

}  // namespace pamcurate
