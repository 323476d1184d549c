#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <vector>

#include "pamcurate/types.hpp"

namespace pamcurate {

/// Embedding shard file layout (little-endian):
///
///   "PAMEMB01"  8 bytes magic
///   u32         dim
///   u64         count
///   count x { u64 window_id, dim x f32 }
inline constexpr char kShardMagic[8] = {'P', 'A', 'M', 'E', 'M', 'B', '0', '1'};
inline constexpr std::uint64_t kShardHeaderBytes = 8 + 4 + 8;

class EmbeddingShard {
 public:
  EmbeddingShard() = default;
  explicit EmbeddingShard(std::uint32_t dim) : dim_(dim) {}

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  void add(WindowId id, std::span<const float> vector);

  WindowId id(std::size_t i) const { return ids_[i]; }
  std::span<const float> vector(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  const std::vector<WindowId>& ids() const { return ids_; }
  const std::vector<float>& data() const { return data_; }

  /// Throws ValidationError on non-finite values or duplicate ids.
  void validate() const;

  /// Bit-exact comparison of dims, ids and float payloads.
  friend bool operator==(const EmbeddingShard& a, const EmbeddingShard& b);

 private:
  std::uint32_t dim_ = 0;
  std::vector<WindowId> ids_;
  std::vector<float> data_;
};

void write_shard(const EmbeddingShard& shard, const std::filesystem::path& path);

/// Reads and validates a whole shard. If expected_dim is set the header dim
/// must match it.
EmbeddingShard read_shard(const std::filesystem::path& path,
                          std::optional<std::uint32_t> expected_dim = std::nullopt);

/// Sequential record reader for shards that do not fit in memory.
class ShardReader {
 public:
  explicit ShardReader(const std::filesystem::path& path,
                       std::optional<std::uint32_t> expected_dim = std::nullopt);

  std::uint32_t dim() const { return dim_; }
  std::uint64_t count() const { return count_; }

  /// Reads the next record into `out` (resized to dim). Returns false after
  /// the last record. Throws ParseError on truncation or non-finite values.
  bool next(WindowId& id, std::vector<float>& out);

 private:
  std::ifstream in_;
  std::uint64_t file_size_ = 0;
  std::uint32_t dim_ = 0;
  std::uint64_t count_ = 0;
  std::uint64_t read_ = 0;
  std::uint64_t offset_ = 0;
  std::vector<unsigned char> buffer_;
};

}  // namespace pamcurate
