#include "pamcurate/types.hpp"

#include <algorithm>
#include <cmath>

#include "pamcurate/errors.hpp"

namespace pamcurate {

double wrap_longitude(double lon) {
  double wrapped = std::fmod(lon + 180.0, 360.0);
  if (wrapped < 0) wrapped += 360.0;
  wrapped -= 180.0;
  // fmod can round up to exactly +180 for tiny negative inputs.
  if (wrapped >= 180.0) wrapped -= 360.0;
  return wrapped;
}

GeoPoint GeoPoint::make(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon)) {
    throw ValidationError("non-finite coordinate");
  }
  if (lat < -90.0 || lat > 90.0) {
    throw ValidationError("latitude out of range: " + std::to_string(lat));
  }
  return GeoPoint{lat, wrap_longitude(lon)};
}

const char* to_string(Source source) {
  switch (source) {
    case Source::kAis:
      return "ais";
    case Source::kHkmeans:
      return "hkmeans";
  }
  return "?";
}

Source source_from_string(const std::string& text) {
  if (text == "ais") return Source::kAis;
  if (text == "hkmeans") return Source::kHkmeans;
  throw ValidationError("unknown source '" + text + "'");
}

void canonicalize(std::vector<ManifestEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ManifestEntry& a, const ManifestEntry& b) {
                     return a.window_id < b.window_id;
                   });
  auto dup = std::adjacent_find(entries.begin(), entries.end(),
                                [](const ManifestEntry& a, const ManifestEntry& b) {
                                  return a.window_id == b.window_id;
                                });
  if (dup != entries.end()) {
    throw ValidationError("duplicate window_id " + std::to_string(dup->window_id));
  }
}

}  // namespace pamcurate
