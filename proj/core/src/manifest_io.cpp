#include "pamcurate/manifest_io.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "json.hpp"
#include "pamcurate/errors.hpp"

namespace pamcurate {

using nlohmann::ordered_json;

std::string format_cluster_path(const std::vector<std::uint32_t>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '/';
    out += std::to_string(path[i]);
  }
  return out;
}

std::vector<std::uint32_t> parse_cluster_path(std::string_view text) {
  std::vector<std::uint32_t> path;
  if (text.empty()) throw ValidationError("empty cluster_path");
  std::size_t pos = 0;
  while (true) {
    const std::size_t slash = text.find('/', pos);
    const std::string_view part = text.substr(pos, slash == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : slash - pos);
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
      throw ValidationError("bad cluster_path '" + std::string(text) + "'");
    }
    path.push_back(v);
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
  return path;
}

std::string format_manifest_line(const ManifestEntry& e) {
  ordered_json j;
  j["window_id"] = e.window_id;
  j["hydrophone_id"] = e.hydrophone_id;
  j["recording_id"] = e.recording_id;
  j["offset_s"] = e.offset_s;
  j["source"] = to_string(e.source);
  if (e.mmsi) j["mmsi"] = *e.mmsi;
  if (e.cluster_path) j["cluster_path"] = format_cluster_path(*e.cluster_path);
  return j.dump();
}

ManifestEntry parse_manifest_line(std::string_view line, std::uint64_t line_offset) {
  static const std::set<std::string> kKeys = {"window_id", "hydrophone_id", "recording_id",
                                              "offset_s",  "source",        "mmsi",
                                              "cluster_path"};
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError(ParseError::Kind::kSyntax, line_offset, "manifest line: " + why);
  };
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw fail(e.what());
  }
  if (!j.is_object()) throw fail("not an object");
  for (const auto& item : j.items()) {
    if (!kKeys.count(item.key())) throw fail("unknown key '" + item.key() + "'");
  }
  try {
    ManifestEntry e;
    if (!j.at("window_id").is_number_unsigned()) throw fail("window_id must be unsigned");
    e.window_id = j.at("window_id").get<WindowId>();
    e.hydrophone_id = j.at("hydrophone_id").get<std::string>();
    e.recording_id = j.at("recording_id").get<std::string>();
    if (!j.at("offset_s").is_number_integer()) throw fail("offset_s must be an integer");
    e.offset_s = j.at("offset_s").get<std::int64_t>();
    e.source = source_from_string(j.at("source").get<std::string>());
    if (j.contains("mmsi")) {
      if (!j.at("mmsi").is_number_unsigned()) throw fail("mmsi must be unsigned");
      e.mmsi = j.at("mmsi").get<Mmsi>();
    }
    if (j.contains("cluster_path")) {
      e.cluster_path = parse_cluster_path(j.at("cluster_path").get<std::string>());
    }
    return e;
  } catch (const ordered_json::exception& ex) {
    throw fail(ex.what());
  } catch (const ValidationError& ex) {
    throw fail(ex.what());
  }
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path) {
  std::vector<ManifestEntry> sorted = entries;
  canonicalize(sorted);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    for (const auto& e : sorted) out << format_manifest_line(e) << '\n';
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::kIo, 0, "cannot open " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    const std::uint64_t line_len = line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) entries.push_back(parse_manifest_line(line, offset));
    offset += line_len;
  }
  canonicalize(entries);
  return entries;
}

}  // namespace pamcurate
