#include "pamcurate/window.hpp"

#include <string>

#include "pamcurate/errors.hpp"
#include "pamcurate/random.hpp"

namespace pamcurate {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

std::int64_t window_count(std::int64_t duration_s) {
  if (duration_s < 0) {
    throw ValidationError("negative duration " + std::to_string(duration_s));
  }
  return duration_s / kWindowSeconds;
}

WindowId window_id_of(std::string_view hydrophone_id, std::string_view recording_id,
                      std::int64_t offset_s) {
  if (offset_s < 0 || offset_s % kWindowSeconds != 0) {
    throw ValidationError("window offset " + std::to_string(offset_s) +
                          " is not a non-negative multiple of 10");
  }
  std::uint64_t h = fnv1a(kFnvOffset, hydrophone_id);
  h = fnv1a(h, "/");
  h = fnv1a(h, recording_id);
  h = fnv1a(h, "/");
  h = fnv1a(h, std::to_string(offset_s));
  return mix64(h);
}

std::optional<std::int64_t> window_offset_at(const Recording& recording, UnixSeconds time) {
  if (time < recording.start) return std::nullopt;
  const std::int64_t rel = time - recording.start;
  const std::int64_t offset = rel / kWindowSeconds * kWindowSeconds;
  if (offset + kWindowSeconds > recording.duration_s) return std::nullopt;
  return offset;
}

}  // namespace pamcurate
