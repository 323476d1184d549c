#include "run_config.hpp"

#include <charconv>
#include <fstream>

namespace pamcurate::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

}  // namespace

std::vector<std::uint32_t> parse_levels_csv(const std::string& text) {
  std::vector<std::uint32_t> levels;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + comma, v);
    if (comma == pos || ec != std::errc{} || ptr != text.data() + comma) {
      throw UsageError("bad --levels value '" + text + "'");
    }
    levels.push_back(v);
    pos = comma + 1;
  }
  return levels;
}

RunConfig RunConfig::from_json(const json& doc, const std::filesystem::path& base_dir) {
  const json& j = doc.contains("config") && doc.contains("stage") ? doc.at("config") : doc;
  RunConfig c;
  try {
    if (j.contains("deployment")) c.deployment = resolve(base_dir, j.at("deployment"));
    if (j.contains("ais")) {
      for (const auto& p : j.at("ais")) c.ais.push_back(resolve(base_dir, p));
    }
    if (j.contains("shards")) {
      for (const auto& p : j.at("shards")) c.shards.push_back(resolve(base_dir, p));
    }
    if (j.contains("out")) c.out = resolve(base_dir, j.at("out"));
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.side_km = j.value("side_km", c.side_km);
    if (j.contains("threshold") && !j.at("threshold").is_null()) {
      c.threshold = j.at("threshold").get<std::uint64_t>();
    }
    c.knee_sensitivity = j.value("knee_sensitivity", c.knee_sensitivity);
    if (j.contains("levels")) c.levels = j.at("levels").get<std::vector<std::uint32_t>>();
    c.target_n = j.value("target_n", c.target_n);
    c.workers = j.value("workers", c.workers);
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      c.batch_size = f.value("batch_size", c.batch_size);
      c.passes = f.value("passes", c.passes);
      c.resample_rounds = f.value("resample_rounds", c.resample_rounds);
      c.resample_size = f.value("resample_size", c.resample_size);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("run config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return from_json(j, std::filesystem::absolute(path).parent_path());
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["deployment"] = deployment.string();
  j["ais"] = ordered_json::array();
  for (const auto& p : ais) j["ais"].push_back(p.string());
  j["shards"] = ordered_json::array();
  for (const auto& p : shards) j["shards"].push_back(p.string());
  j["out"] = out.string();
  j["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
  j["side_km"] = side_km;
  j["threshold"] = threshold ? ordered_json(*threshold) : ordered_json(nullptr);
  j["knee_sensitivity"] = knee_sensitivity;
  j["levels"] = levels;
  j["target_n"] = target_n;
  j["workers"] = workers;
  j["fit"] = {{"batch_size", batch_size},
              {"passes", passes},
              {"resample_rounds", resample_rounds},
              {"resample_size", resample_size}};
  return j;
}

void RunConfig::validate() const {
  if (!seed) throw UsageError("a seed is required (--seed or \"seed\" in the config)");
  if (out.empty()) throw UsageError("an output directory is required (--out)");
  if (!(side_km > 0.0)) throw UsageError("--side-km must be positive");
  if (threshold && *threshold == 0) throw UsageError("--threshold must be at least 1");
  if (target_n == 0) throw UsageError("--target-n must be positive");
  if (workers == 0) throw UsageError("--workers must be at least 1");
}

}  // namespace pamcurate::cli
