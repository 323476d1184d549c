#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "pamcurate/deployment.hpp"
#include "pamcurate/types.hpp"

namespace pamcurate {

/// Mean meridian length of one degree of latitude, in meters.
inline constexpr double kMetersPerDegree = 111195.0;

/// Fence side used in production, in kilometers.
inline constexpr double kDefaultFenceSideKm = 4.0;

/// Axis-aligned square around a hydrophone in a local equirectangular
/// projection. Boundaries are closed.
struct GeoFence {
  GeoPoint center;
  double half_side_m = 0.0;
  double lat_half_span_deg = 0.0;
  double lon_half_span_deg = 0.0;
};

/// Throws ValidationError if side_km <= 0 or not finite, and
/// ValidationError for |lat| >= 89 where the projection degenerates.
GeoFence fence_of(const GeoPoint& center, double side_km);
inline GeoFence fence_of(const Hydrophone& hydrophone, double side_km) {
  return fence_of(hydrophone.location, side_km);
}

bool contains(const GeoFence& fence, const GeoPoint& point);

/// True when the point is finite and within lat/lon bounds.
bool is_valid_position(const GeoPoint& point);

struct AlignedWindow {
  AudioWindow window;
  std::set<Mmsi> mmsis;

  friend bool operator==(const AlignedWindow&, const AlignedWindow&) = default;
};

/// Windows with at least one aligned pulse, keyed by window_id.
class AlignedWindowSet {
 public:
  void add(const AudioWindow& window, Mmsi mmsi);

  /// Union of mmsi sets. Associative and commutative.
  void merge(const AlignedWindowSet& other);

  std::size_t size() const { return windows_.size(); }
  bool empty() const { return windows_.empty(); }
  const std::map<WindowId, AlignedWindow>& windows() const { return windows_; }

  friend bool operator==(const AlignedWindowSet&, const AlignedWindowSet&) = default;

 private:
  std::map<WindowId, AlignedWindow> windows_;
};

struct AlignedPulse {
  AisPulse pulse;
  std::string hydrophone_id;
  WindowId window_id = 0;

  friend bool operator==(const AlignedPulse&, const AlignedPulse&) = default;
};

struct AlignResult {
  std::vector<AlignedPulse> pulses;  // sorted; a pulse may align to several hydrophones
  AlignedWindowSet windows;
  std::size_t rejected = 0;          // invalid coordinates
};

/// Joins pulses with hydrophone fences and recording windows. Output does not
/// depend on input order or worker count.
AlignResult align(std::span<const AisPulse> pulses, const DeploymentConfig& config,
                  double side_km = kDefaultFenceSideKm, unsigned workers = 1);

/// Sidecar lines "window_id,mmsi", sorted lexicographically as strings.
void write_sidecar(const AlignedWindowSet& windows, const std::filesystem::path& path);

/// Reads a sidecar and attaches window metadata from the deployment.
/// Throws ValidationError for ids unknown to the deployment.
AlignedWindowSet read_sidecar(const std::filesystem::path& path,
                              const DeploymentConfig& config);

}  // namespace pamcurate
