#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pamcurate {

/// Length of one curation window in seconds.
inline constexpr std::int64_t kWindowSeconds = 10;

/// Sample rate every recording is resampled to upstream. Metadata only.
inline constexpr std::int32_t kTargetSampleRateHz = 16000;

/// Seconds since the Unix epoch, UTC.
using UnixSeconds = std::int64_t;

using WindowId = std::uint64_t;
using Mmsi = std::uint64_t;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  /// Validates finiteness and latitude bounds and wraps lon into [-180, 180).
  static GeoPoint make(double lat, double lon);

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Wraps a longitude (or longitude difference) into [-180, 180).
double wrap_longitude(double lon);

struct Recording {
  std::string id;
  UnixSeconds start = 0;
  std::int64_t duration_s = 0;
  std::int32_t native_sample_rate_hz = 0;

  UnixSeconds end() const { return start + duration_s; }

  friend bool operator==(const Recording&, const Recording&) = default;
};

struct Hydrophone {
  std::string id;
  GeoPoint location;
  std::vector<Recording> recordings;  // sorted by start, non-overlapping

  friend bool operator==(const Hydrophone&, const Hydrophone&) = default;
};

struct AudioWindow {
  WindowId window_id = 0;
  std::string hydrophone_id;
  std::string recording_id;
  std::int64_t offset_s = 0;

  friend bool operator==(const AudioWindow&, const AudioWindow&) = default;
};

struct AisPulse {
  Mmsi mmsi = 0;
  UnixSeconds time = 0;
  GeoPoint position;
  std::optional<std::int32_t> vessel_type;

  friend bool operator==(const AisPulse&, const AisPulse&) = default;
};

enum class Source { kAis, kHkmeans };

const char* to_string(Source source);
Source source_from_string(const std::string& text);

struct ManifestEntry {
  WindowId window_id = 0;
  std::string hydrophone_id;
  std::string recording_id;
  std::int64_t offset_s = 0;
  Source source = Source::kHkmeans;
  std::optional<Mmsi> mmsi;
  std::optional<std::vector<std::uint32_t>> cluster_path;  // root -> leaf

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Final assembled dataset. Entries are sorted by window_id and unique.
struct CurationManifest {
  std::vector<ManifestEntry> entries;

  friend bool operator==(const CurationManifest&, const CurationManifest&) = default;
};

/// Sorts entries by window_id and rejects duplicates.
void canonicalize(std::vector<ManifestEntry>& entries);

}  // namespace pamcurate
