#include "pamcurate/ais_csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "pamcurate/errors.hpp"
#include "pamcurate/timeutil.hpp"

namespace pamcurate {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

AisCsvResult read_ais_csv(std::istream& in) {
  AisCsvResult result;
  std::string line;
  if (!std::getline(in, line)) return result;  // empty file: no header, no rows

  std::map<std::string, std::size_t> column;
  const auto header = split_csv_line(line);
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name(trim(header[i]));
    // Strip a UTF-8 byte order mark on the first column.
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
    column.emplace(name, i);
  }
  std::size_t idx[5];
  const char* required[5] = {"MMSI", "BaseDateTime", "LAT", "LON", "VesselType"};
  for (int k = 0; k < 5; ++k) {
    auto it = column.find(required[k]);
    if (it == column.end()) {
      throw ParseError(ParseError::Kind::kSyntax, 0,
                       std::string("AIS header lacks column ") + required[k]);
    }
    idx[k] = it->second;
  }
  const std::size_t min_fields = *std::max_element(idx, idx + 5) + 1;

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++result.rows;
    const auto fields = split_csv_line(line);
    AisPulse p;
    double lat = 0, lon = 0;
    bool ok = fields.size() >= min_fields && parse_number(fields[idx[0]], p.mmsi) && p.mmsi > 0 &&
              parse_number(fields[idx[2]], lat) && parse_number(fields[idx[3]], lon);
    if (ok) {
      const auto t = parse_utc(trim(fields[idx[1]]));
      ok = t.has_value();
      if (ok) p.time = *t;
    }
    if (ok) {
      const auto vt = trim(fields[idx[4]]);
      std::int32_t code = 0;
      if (!vt.empty()) {
        ok = parse_number(vt, code);
        if (ok) p.vessel_type = code;
      }
    }
    if (!ok) {
      ++result.malformed;
      continue;
    }
    p.position = GeoPoint{lat, lon};
    result.pulses.push_back(p);
  }
  return result;
}

AisCsvResult read_ais_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::kIo, 0, "cannot open " + path.string());
  return read_ais_csv(in);
}

}  // namespace pamcurate
