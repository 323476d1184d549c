#pragma once

#include <string>
#include <optional>
#include <string_view>

#include "pamcurate/types.hpp"

namespace pamcurate {

/// Parses "YYYY-MM-DDTHH:MM:SS" (UTC). A space instead of 'T' is accepted.
/// Returns std::nullopt on malformed input.
std::optional<UnixSeconds> parse_utc(std::string_view text);

/// Inverse of parse_utc, always with 'T'.
std::string format_utc(UnixSeconds t);

}  // namespace pamcurate
