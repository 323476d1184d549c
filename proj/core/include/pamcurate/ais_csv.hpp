#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "pamcurate/types.hpp"

namespace pamcurate {

struct AisCsvResult {
  std::vector<AisPulse> pulses;
  std::size_t rows = 0;
  std::size_t malformed = 0;
};

/// Reads MarineCadastre-style AIS CSV. Required header columns: MMSI,
/// BaseDateTime, LAT, LON, VesselType (in any order); other columns are
/// ignored. Rows that fail to parse are counted and skipped. Coordinates are
/// passed through unvalidated. Throws ParseError if the header lacks a
/// required column.
AisCsvResult read_ais_csv(std::istream& in);
AisCsvResult read_ais_csv(const std::filesystem::path& path);

/// Splits one CSV line, honoring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace pamcurate
