#include "pamcurate/ais_curate.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "pamcurate/errors.hpp"
#include "pamcurate/parallel.hpp"
#include "pamcurate/random.hpp"

namespace pamcurate {

std::uint64_t OccurrenceHistogram::total_occurrences() const {
  std::uint64_t total = 0;
  for (const auto& [mmsi, c] : counts) total += c;
  return total;
}

std::vector<std::uint64_t> OccurrenceHistogram::ranked_counts() const {
  std::vector<std::uint64_t> ranked;
  ranked.reserve(counts.size());
  for (const auto& [mmsi, c] : counts) ranked.push_back(c);
  std::stable_sort(ranked.begin(), ranked.end(), std::greater<>());
  return ranked;
}

OccurrenceHistogram histogram(const AlignedWindowSet& aligned) {
  OccurrenceHistogram h;
  for (const auto& [id, aw] : aligned.windows()) {
    for (Mmsi m : aw.mmsis) ++h.counts[m];
  }
  h.total_windows = aligned.size();
  return h;
}

Knee find_knee(std::span<const double> y, double sensitivity) {
  const std::size_t n = y.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (y[i] > y[i - 1]) throw ValidationError("find_knee: curve must be non-increasing");
  }
  std::size_t distinct = n == 0 ? 0 : 1;
  for (std::size_t i = 1; i < n; ++i) distinct += y[i] != y[i - 1];
  if (distinct < 3) {
    throw DegenerateInputError("occurrence curve has " + std::to_string(distinct) +
                               " distinct values; no knee can be detected, set the "
                               "threshold manually");
  }
  const double ymax = y.front();
  const double ymin = y.back();
  const double step = 1.0 / static_cast<double>(n - 1);

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xn = static_cast<double>(i) * step;
    const double yn = (y[i] - ymin) / (ymax - ymin);
    diff[i] = (1.0 - yn) - xn;
  }
  const auto best = std::max_element(diff.begin(), diff.end());
  const std::size_t rank = static_cast<std::size_t>(best - diff.begin());
  const double threshold = *best - sensitivity * step;
  const bool confirmed = std::any_of(best + 1, diff.end(), [&](double d) { return d < threshold; });
  if (!confirmed) {
    throw DegenerateInputError("occurrence curve has no pronounced knee at sensitivity " +
                               std::to_string(sensitivity) + "; set the threshold manually");
  }
  return Knee{rank, y[rank], *best};
}

Threshold detect_knee(const OccurrenceHistogram& h, double sensitivity) {
  const auto ranked = h.ranked_counts();
  std::vector<double> curve(ranked.begin(), ranked.end());
  const Knee knee = find_knee(curve, sensitivity);
  return Threshold{std::max<std::uint64_t>(1, ranked[knee.rank]), ThresholdOrigin::kDetected};
}

double sampling_probability(std::uint64_t count, std::uint64_t t) {
  if (count <= t) return 1.0;
  return static_cast<double>(t) / static_cast<double>(count);
}

std::vector<ManifestEntry> curate(const AlignedWindowSet& aligned, Threshold threshold,
                                  std::uint64_t seed, unsigned workers) {
  if (threshold.t == 0) throw ValidationError("threshold must be at least 1");

  std::map<Mmsi, std::vector<WindowId>> by_ship;
  for (const auto& [id, aw] : aligned.windows()) {
    for (Mmsi m : aw.mmsis) by_ship[m].push_back(id);
  }
  std::vector<std::pair<Mmsi, const std::vector<WindowId>*>> ships;
  ships.reserve(by_ship.size());
  for (const auto& [m, ids] : by_ship) ships.emplace_back(m, &ids);

  std::vector<std::vector<std::pair<WindowId, Mmsi>>> kept(chunk_count(ships.size(), workers));
  parallel_chunks(ships.size(), workers, [&](std::size_t begin, std::size_t end, std::size_t c) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto [mmsi, ids] = ships[s];
      const double p = sampling_probability(ids->size(), threshold.t);
      Rng rng(seed ^ mmsi);
      for (WindowId id : *ids) {
        if (p >= 1.0 || rng.uniform() < p) kept[c].emplace_back(id, mmsi);
      }
    }
  });

  std::unordered_map<WindowId, Mmsi> retained;
  for (const auto& part : kept) {
    for (const auto& [id, mmsi] : part) {
      auto [it, inserted] = retained.emplace(id, mmsi);
      if (!inserted) it->second = std::min(it->second, mmsi);
    }
  }

  std::vector<ManifestEntry> entries;
  entries.reserve(retained.size());
  for (const auto& [id, aw] : aligned.windows()) {
    auto it = retained.find(id);
    if (it == retained.end()) continue;
    ManifestEntry e;
    e.window_id = id;
    e.hydrophone_id = aw.window.hydrophone_id;
    e.recording_id = aw.window.recording_id;
    e.offset_s = aw.window.offset_s;
    e.source = Source::kAis;
    e.mmsi = it->second;
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace pamcurate
