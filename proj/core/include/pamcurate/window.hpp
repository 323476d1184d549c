#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "pamcurate/types.hpp"

namespace pamcurate {

/// Number of complete, non-overlapping 10 s windows in a recording.
/// Trailing partial windows are dropped.
std::int64_t window_count(std::int64_t duration_s);

/// Stable 64-bit identifier of a window.
///
/// Defined as FNV-1a 64 over the UTF-8 string
/// "<hydrophone_id>/<recording_id>/<offset_s>" (offset in decimal), followed
/// by the splitmix64 finalizer to spread nearby inputs. Throws
/// ValidationError when offset_s is negative or not a multiple of 10.
WindowId window_id_of(std::string_view hydrophone_id, std::string_view recording_id,
                      std::int64_t offset_s);

/// Window containing `time` in `recording`, if the window is complete.
std::optional<std::int64_t> window_offset_at(const Recording& recording, UnixSeconds time);

}  // namespace pamcurate
