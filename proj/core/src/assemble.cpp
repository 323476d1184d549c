#include "pamcurate/assemble.hpp"

#include <cstdio>

#include "json.hpp"
#include "pamcurate/errors.hpp"

namespace pamcurate {

double manifest_hours(std::uint64_t entries) {
  return static_cast<double>(entries) * static_cast<double>(kWindowSeconds) / 3600.0;
}

AssemblySummary summarize(const CurationManifest& manifest, std::uint64_t overlap) {
  AssemblySummary s;
  s.overlap = overlap;
  for (const auto& e : manifest.entries) {
    auto& per = s.per_hydrophone[e.hydrophone_id];
    if (e.source == Source::kAis) {
      ++s.ais_entries;
      ++per.ais;
    } else {
      ++s.hkmeans_entries;
      ++per.hkmeans;
    }
  }
  s.total_entries = manifest.entries.size();
  s.total_hours = manifest_hours(s.total_entries);
  return s;
}

Assembly assemble(std::vector<ManifestEntry> ais_entries,
                  std::vector<ManifestEntry> hkmeans_entries) {
  for (const auto& e : ais_entries) {
    if (e.source != Source::kAis) {
      throw ValidationError("entry " + std::to_string(e.window_id) + " in the AIS input is tagged " +
                            to_string(e.source));
    }
  }
  for (const auto& e : hkmeans_entries) {
    if (e.source != Source::kHkmeans) {
      throw ValidationError("entry " + std::to_string(e.window_id) +
                            " in the cluster input is tagged " + to_string(e.source));
    }
  }
  canonicalize(ais_entries);
  canonicalize(hkmeans_entries);

  Assembly out;
  auto& merged = out.manifest.entries;
  merged.reserve(ais_entries.size() + hkmeans_entries.size());
  std::uint64_t overlap = 0;
  std::size_t i = 0, j = 0;
  while (i < ais_entries.size() || j < hkmeans_entries.size()) {
    if (j == hkmeans_entries.size() ||
        (i < ais_entries.size() && ais_entries[i].window_id < hkmeans_entries[j].window_id)) {
      merged.push_back(std::move(ais_entries[i++]));
    } else if (i == ais_entries.size() ||
               hkmeans_entries[j].window_id < ais_entries[i].window_id) {
      merged.push_back(std::move(hkmeans_entries[j++]));
    } else {
      ManifestEntry e = std::move(ais_entries[i++]);
      if (!e.cluster_path) e.cluster_path = std::move(hkmeans_entries[j].cluster_path);
      ++j;
      ++overlap;
      merged.push_back(std::move(e));
    }
  }
  out.summary = summarize(out.manifest, overlap);
  return out;
}

std::string AssemblySummary::to_json() const {
  nlohmann::ordered_json j;
  j["entries"] = total_entries;
  j["ais_entries"] = ais_entries;
  j["hkmeans_entries"] = hkmeans_entries;
  j["overlap"] = overlap;
  j["window_seconds"] = kWindowSeconds;
  char hours[32];
  std::snprintf(hours, sizeof hours, "%.2f", total_hours);
  j["total_hours"] = total_hours;
  j["total_hours_text"] = hours;
  j["per_hydrophone"] = nlohmann::ordered_json::object();
  for (const auto& [id, c] : per_hydrophone) {
    j["per_hydrophone"][id] = {{"ais", c.ais}, {"hkmeans", c.hkmeans}, {"total", c.ais + c.hkmeans}};
  }
  return j.dump(2) + "\n";
}

}  // namespace pamcurate
