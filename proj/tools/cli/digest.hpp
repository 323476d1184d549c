#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace pamcurate::cli {

/// Lowercase hex SHA-256 of a file's bytes. This is the digest algorithm
/// recorded in run records ("sha256").
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace pamcurate::cli
