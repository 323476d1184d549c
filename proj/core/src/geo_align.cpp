#include "pamcurate/geo_align.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <tuple>

#include "pamcurate/errors.hpp"
#include "pamcurate/parallel.hpp"
#include "pamcurate/window.hpp"

namespace pamcurate {

GeoFence fence_of(const GeoPoint& center, double side_km) {
  if (!std::isfinite(side_km) || side_km <= 0.0) {
    throw ValidationError("fence side must be positive, got " + std::to_string(side_km));
  }
  if (!is_valid_position(center)) throw ValidationError("invalid fence center");
  if (std::abs(center.lat) >= 89.0) {
    throw ValidationError("unsupported latitude " + std::to_string(center.lat) +
                          ": square fences need |lat| < 89");
  }
  GeoFence fence;
  fence.center = center;
  fence.half_side_m = side_km * 500.0;
  fence.lat_half_span_deg = fence.half_side_m / kMetersPerDegree;
  fence.lon_half_span_deg =
      fence.lat_half_span_deg / std::cos(center.lat * std::numbers::pi / 180.0);
  return fence;
}

bool is_valid_position(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

bool contains(const GeoFence& fence, const GeoPoint& point) {
  const double dlat = std::abs(point.lat - fence.center.lat);
  const double dlon = std::abs(wrap_longitude(point.lon - fence.center.lon));
  return dlat <= fence.lat_half_span_deg && dlon <= fence.lon_half_span_deg;
}

void AlignedWindowSet::add(const AudioWindow& window, Mmsi mmsi) {
  auto [it, inserted] = windows_.try_emplace(window.window_id);
  if (inserted) it->second.window = window;
  it->second.mmsis.insert(mmsi);
}

void AlignedWindowSet::merge(const AlignedWindowSet& other) {
  for (const auto& [id, aw] : other.windows_) {
    auto [it, inserted] = windows_.try_emplace(id, aw);
    if (!inserted) it->second.mmsis.insert(aw.mmsis.begin(), aw.mmsis.end());
  }
}

namespace {

struct FenceEntry {
  const Hydrophone* hydrophone;
  GeoFence fence;
};

auto pulse_key(const AlignedPulse& p) {
  return std::make_tuple(p.window_id, p.pulse.mmsi, p.pulse.time, std::string_view(p.hydrophone_id),
                         p.pulse.position.lat, p.pulse.position.lon,
                         p.pulse.vessel_type.value_or(-1));
}

void align_range(std::span<const AisPulse> pulses, const std::vector<FenceEntry>& fences,
                 AlignResult& out) {
  for (const auto& pulse : pulses) {
    if (!is_valid_position(pulse.position) || pulse.mmsi == 0) {
      ++out.rejected;
      continue;
    }
    for (const auto& f : fences) {
      if (!contains(f.fence, pulse.position)) continue;
      const auto& recs = f.hydrophone->recordings;
      auto it = std::upper_bound(recs.begin(), recs.end(), pulse.time,
                                 [](UnixSeconds t, const Recording& r) { return t < r.start; });
      if (it == recs.begin()) continue;
      const Recording& rec = *std::prev(it);
      const auto offset = window_offset_at(rec, pulse.time);
      if (!offset) continue;
      AudioWindow w{window_id_of(f.hydrophone->id, rec.id, *offset), f.hydrophone->id, rec.id,
                    *offset};
      out.pulses.push_back(AlignedPulse{pulse, f.hydrophone->id, w.window_id});
      out.windows.add(w, pulse.mmsi);
    }
  }
}

}  // namespace

AlignResult align(std::span<const AisPulse> pulses, const DeploymentConfig& config,
                  double side_km, unsigned workers) {
  std::vector<FenceEntry> fences;
  fences.reserve(config.hydrophones.size());
  for (const auto& h : config.hydrophones) fences.push_back({&h, fence_of(h, side_km)});

  std::vector<AlignResult> partial(chunk_count(pulses.size(), workers));
  parallel_chunks(pulses.size(), workers, [&](std::size_t begin, std::size_t end, std::size_t c) {
    align_range(pulses.subspan(begin, end - begin), fences, partial[c]);
  });

  AlignResult result = std::move(partial.front());
  for (std::size_t c = 1; c < partial.size(); ++c) {
    result.rejected += partial[c].rejected;
    result.windows.merge(partial[c].windows);
    result.pulses.insert(result.pulses.end(), partial[c].pulses.begin(), partial[c].pulses.end());
  }
  std::sort(result.pulses.begin(), result.pulses.end(),
            [](const AlignedPulse& a, const AlignedPulse& b) { return pulse_key(a) < pulse_key(b); });
  return result;
}

void write_sidecar(const AlignedWindowSet& windows, const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for (const auto& [id, aw] : windows.windows()) {
    for (Mmsi m : aw.mmsis) lines.push_back(std::to_string(id) + "," + std::to_string(m));
  }
  std::sort(lines.begin(), lines.end());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    for (const auto& l : lines) out << l << '\n';
  }
  std::filesystem::rename(tmp, path);
}

AlignedWindowSet read_sidecar(const std::filesystem::path& path, const DeploymentConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::kIo, 0, "cannot open " + path.string());
  std::vector<std::pair<WindowId, Mmsi>> pairs;
  std::unordered_set<WindowId> wanted;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    const std::uint64_t len = line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      const auto comma = line.find(',');
      WindowId id = 0;
      Mmsi mmsi = 0;
      bool ok = comma != std::string::npos;
      if (ok) {
        auto r1 = std::from_chars(line.data(), line.data() + comma, id);
        auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), mmsi);
        ok = r1.ec == std::errc{} && r1.ptr == line.data() + comma && r2.ec == std::errc{} &&
             r2.ptr == line.data() + line.size() && comma > 0;
      }
      if (!ok) throw ParseError(ParseError::Kind::kSyntax, offset, "bad sidecar line '" + line + "'");
      pairs.emplace_back(id, mmsi);
      wanted.insert(id);
    }
    offset += len;
  }
  const auto resolved = resolve_windows(config, wanted);
  AlignedWindowSet set;
  for (const auto& [id, mmsi] : pairs) {
    auto it = resolved.find(id);
    if (it == resolved.end()) {
      throw ValidationError("sidecar window " + std::to_string(id) + " is not in the deployment");
    }
    set.add(it->second, mmsi);
  }
  return set;
}

}  // namespace pamcurate
