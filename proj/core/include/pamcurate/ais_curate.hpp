#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pamcurate/geo_align.hpp"
#include "pamcurate/types.hpp"

namespace pamcurate {

/// Threshold chosen for the published corpus.
inline constexpr std::uint64_t kPublishedThreshold = 250;

/// Distinct aligned windows per ship.
struct OccurrenceHistogram {
  std::map<Mmsi, std::uint64_t> counts;
  std::uint64_t total_windows = 0;  // distinct windows with any ship

  std::size_t ships() const { return counts.size(); }
  std::uint64_t total_occurrences() const;

  /// Counts sorted descending; ties keep mmsi order.
  std::vector<std::uint64_t> ranked_counts() const;

  friend bool operator==(const OccurrenceHistogram&, const OccurrenceHistogram&) = default;
};

OccurrenceHistogram histogram(const AlignedWindowSet& aligned);

enum class ThresholdOrigin { kDetected, kManual };

struct Threshold {
  std::uint64_t t = 1;
  ThresholdOrigin origin = ThresholdOrigin::kManual;
};

struct Knee {
  std::size_t rank = 0;
  double value = 0.0;
  double difference = 0.0;  // normalized distance below the chord
};

/// Kneedle on a non-increasing curve sampled at equally spaced ranks.
///
/// Both axes are scaled to [0, 1]; the difference curve is the gap between
/// the chord from the first to the last point and the curve, and the knee is
/// its maximum (first on ties). The knee is confirmed only if the difference
/// curve later drops below the maximum minus sensitivity times the rank
/// spacing. Throws DegenerateInputError for
/// fewer than 3 distinct values or an unaccepted knee.
Knee find_knee(std::span<const double> descending, double sensitivity = 1.0);

/// Knee of the ranked occurrence curve, returned as a detected threshold.
Threshold detect_knee(const OccurrenceHistogram& histogram, double sensitivity = 1.0);

/// Retention probability of each window of a ship seen in `count` windows.
double sampling_probability(std::uint64_t count, std::uint64_t t);

/// Keeps every window of ship i independently with probability p_i. A window
/// shared by several ships is kept if any of them keeps it and records the
/// smallest retaining mmsi. Each ship draws from its own stream seeded by
/// seed ^ mmsi, so the result does not depend on the worker count.
std::vector<ManifestEntry> curate(const AlignedWindowSet& aligned, Threshold threshold,
                                  std::uint64_t seed, unsigned workers = 1);

}  // namespace pamcurate
