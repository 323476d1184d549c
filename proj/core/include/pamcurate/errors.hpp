#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pamcurate {

/// Input violates a domain invariant (bad duration, duplicate id, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary or text input could not be decoded.
class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    kIo,
    kBadMagic,
    kBadVersion,
    kDimMismatch,
    kTruncated,
    kNonFinite,
    kDuplicateId,
    kSyntax,
  };

  ParseError(Kind kind, std::uint64_t offset, const std::string& what)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

/// A numeric procedure cannot produce a meaningful answer for this input.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pamcurate
