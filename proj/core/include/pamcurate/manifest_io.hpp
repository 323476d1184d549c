#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pamcurate/types.hpp"

namespace pamcurate {

// Manifest files hold one compact JSON object per line with keys in the
// fixed order window_id, hydrophone_id, recording_id, offset_s, source,
// mmsi, cluster_path. The last two are omitted when absent; cluster_path is
// written as "/"-joined integers from root to leaf. Lines are sorted by
// window_id.

std::string format_manifest_line(const ManifestEntry& entry);

/// Throws ParseError (kind kSyntax, offset = byte offset of the line).
ManifestEntry parse_manifest_line(std::string_view line, std::uint64_t line_offset = 0);

std::string format_cluster_path(const std::vector<std::uint32_t>& path);
std::vector<std::uint32_t> parse_cluster_path(std::string_view text);

/// Sorts a copy by window_id; throws ValidationError on duplicate ids.
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path);

/// Returns entries sorted by window_id; throws ValidationError on duplicates.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace pamcurate
