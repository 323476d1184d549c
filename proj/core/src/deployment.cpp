#include "pamcurate/deployment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pamcurate/errors.hpp"
#include "pamcurate/timeutil.hpp"
#include "pamcurate/window.hpp"

namespace pamcurate {

using nlohmann::json;

void DeploymentConfig::validate() {
  std::set<std::string> ids;
  for (auto& h : hydrophones) {
    if (h.id.empty()) throw ValidationError("hydrophone with empty id");
    if (h.id.find('/') != std::string::npos) {
      throw ValidationError("hydrophone id '" + h.id + "' contains '/'");
    }
    if (!ids.insert(h.id).second) throw ValidationError("duplicate hydrophone id '" + h.id + "'");
    h.location = GeoPoint::make(h.location.lat, h.location.lon);

    std::set<std::string> rec_ids;
    for (const auto& r : h.recordings) {
      if (r.id.empty()) throw ValidationError("recording with empty id on " + h.id);
      if (r.id.find('/') != std::string::npos) {
        throw ValidationError("recording id '" + r.id + "' contains '/'");
      }
      if (!rec_ids.insert(r.id).second) {
        throw ValidationError("duplicate recording id '" + r.id + "' on " + h.id);
      }
      if (r.duration_s < 0) throw ValidationError("negative duration on " + h.id + "/" + r.id);
      if (r.native_sample_rate_hz <= 0) {
        throw ValidationError("non-positive sample rate on " + h.id + "/" + r.id);
      }
    }
    std::sort(h.recordings.begin(), h.recordings.end(),
              [](const Recording& a, const Recording& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < h.recordings.size(); ++i) {
      if (h.recordings[i].start < h.recordings[i - 1].end()) {
        throw ValidationError("recordings " + h.recordings[i - 1].id + " and " +
                              h.recordings[i].id + " overlap on " + h.id);
      }
    }
  }
}

const Hydrophone* DeploymentConfig::find(const std::string& hydrophone_id) const {
  for (const auto& h : hydrophones) {
    if (h.id == hydrophone_id) return &h;
  }
  return nullptr;
}

std::int64_t DeploymentConfig::total_seconds() const {
  std::int64_t total = 0;
  for (const auto& h : hydrophones) {
    for (const auto& r : h.recordings) total += r.duration_s;
  }
  return total;
}

std::int64_t DeploymentConfig::total_windows() const {
  std::int64_t total = 0;
  for (const auto& h : hydrophones) {
    for (const auto& r : h.recordings) total += window_count(r.duration_s);
  }
  return total;
}

void DeploymentConfig::for_each_window(
    const std::function<void(const AudioWindow&)>& visit) const {
  AudioWindow w;
  for (const auto& h : hydrophones) {
    w.hydrophone_id = h.id;
    for (const auto& r : h.recordings) {
      w.recording_id = r.id;
      const std::int64_t n = window_count(r.duration_s);
      for (std::int64_t i = 0; i < n; ++i) {
        w.offset_s = i * kWindowSeconds;
        w.window_id = window_id_of(h.id, r.id, w.offset_s);
        visit(w);
      }
    }
  }
}

DeploymentConfig DeploymentConfig::parse(const std::string& json_text) {
  DeploymentConfig config;
  try {
    const json doc = json::parse(json_text);
    for (const auto& jh : doc.at("hydrophones")) {
      Hydrophone h;
      h.id = jh.at("id").get<std::string>();
      h.location = GeoPoint{jh.at("lat").get<double>(), jh.at("lon").get<double>()};
      if (jh.contains("recordings")) {
        for (const auto& jr : jh.at("recordings")) {
          Recording r;
          r.id = jr.at("id").get<std::string>();
          const auto start_text = jr.at("start").get<std::string>();
          const auto start = parse_utc(start_text);
          if (!start) throw ValidationError("bad start time '" + start_text + "'");
          r.start = *start;
          r.duration_s = jr.at("duration_s").get<std::int64_t>();
          r.native_sample_rate_hz = jr.value("sample_rate_hz", kTargetSampleRateHz);
          h.recordings.push_back(std::move(r));
        }
      }
      config.hydrophones.push_back(std::move(h));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("deployment config: ") + e.what());
  }
  config.validate();
  return config;
}

DeploymentConfig DeploymentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseError::Kind::kIo, 0, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string DeploymentConfig::to_json() const {
  json doc;
  doc["hydrophones"] = json::array();
  for (const auto& h : hydrophones) {
    json jh;
    jh["id"] = h.id;
    jh["lat"] = h.location.lat;
    jh["lon"] = h.location.lon;
    jh["recordings"] = json::array();
    for (const auto& r : h.recordings) {
      jh["recordings"].push_back({{"id", r.id},
                                  {"start", format_utc(r.start)},
                                  {"duration_s", r.duration_s},
                                  {"sample_rate_hz", r.native_sample_rate_hz}});
    }
    doc["hydrophones"].push_back(std::move(jh));
  }
  return doc.dump(2) + "\n";
}

std::unordered_map<WindowId, AudioWindow> resolve_windows(
    const DeploymentConfig& config, const std::unordered_set<WindowId>& wanted) {
  std::unordered_map<WindowId, AudioWindow> found;
  if (wanted.empty()) return found;
  found.reserve(wanted.size());
  config.for_each_window([&](const AudioWindow& w) {
    if (wanted.count(w.window_id)) found.emplace(w.window_id, w);
  });
  return found;
}

std::optional<std::pair<AudioWindow, AudioWindow>> find_window_id_collision(
    const DeploymentConfig& config) {
  std::unordered_map<WindowId, AudioWindow> seen;
  std::optional<std::pair<AudioWindow, AudioWindow>> collision;
  config.for_each_window([&](const AudioWindow& w) {
    if (collision) return;
    auto [it, inserted] = seen.emplace(w.window_id, w);
    if (!inserted) collision.emplace(it->second, w);
  });
  return collision;
}

}  // namespace pamcurate
