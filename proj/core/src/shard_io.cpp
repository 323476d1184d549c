#include "pamcurate/shard_io.hpp"

#include <cmath>
#include <cstring>
#include <unordered_set>

#include "binary_io.hpp"
#include "pamcurate/errors.hpp"

namespace pamcurate {

using detail::ByteWriter;

void EmbeddingShard::add(WindowId id, std::span<const float> vector) {
  if (vector.size() != dim_) {
    throw ValidationError("shard dim is " + std::to_string(dim_) + ", vector has " +
                          std::to_string(vector.size()) + " components");
  }
  ids_.push_back(id);
  data_.insert(data_.end(), vector.begin(), vector.end());
}

void EmbeddingShard::validate() const {
  if (dim_ == 0) throw ValidationError("shard dim must be positive");
  for (float v : data_) {
    if (!std::isfinite(v)) throw ValidationError("shard contains a non-finite value");
  }
  std::unordered_set<WindowId> seen;
  seen.reserve(ids_.size());
  for (WindowId id : ids_) {
    if (!seen.insert(id).second) {
      throw ValidationError("duplicate window_id " + std::to_string(id) + " in shard");
    }
  }
}

bool operator==(const EmbeddingShard& a, const EmbeddingShard& b) {
  return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.data_.size() == b.data_.size() &&
         (a.data_.empty() ||
          std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0);
}

void write_shard(const EmbeddingShard& shard, const std::filesystem::path& path) {
  shard.validate();
  ByteWriter w;
  w.bytes(kShardMagic, sizeof kShardMagic);
  w.u32(shard.dim());
  w.u64(shard.size());
  for (std::size_t i = 0; i < shard.size(); ++i) {
    w.u64(shard.id(i));
    for (float v : shard.vector(i)) w.f32(v);
  }
  detail::write_file_atomic(path, w.buffer().data(), w.buffer().size());
}

ShardReader::ShardReader(const std::filesystem::path& path,
                         std::optional<std::uint32_t> expected_dim)
    : in_(path, std::ios::binary) {
  using Kind = ParseError::Kind;
  if (!in_) throw ParseError(Kind::kIo, 0, "cannot open shard " + path.string());
  file_size_ = std::filesystem::file_size(path);

  unsigned char header[kShardHeaderBytes];
  const std::uint64_t got = std::min<std::uint64_t>(file_size_, kShardHeaderBytes);
  in_.read(reinterpret_cast<char*>(header), static_cast<std::streamsize>(got));
  const std::uint64_t magic_len = std::min<std::uint64_t>(got, 8);
  if (std::memcmp(header, kShardMagic, magic_len) != 0) {
    throw ParseError(Kind::kBadMagic, 0, "bad shard magic in " + path.string());
  }
  if (got < kShardHeaderBytes) {
    throw ParseError(Kind::kTruncated, got, "truncated shard header in " + path.string());
  }
  dim_ = 0;
  for (int i = 0; i < 4; ++i) dim_ |= std::uint32_t{header[8 + i]} << (8 * i);
  count_ = detail::decode_u64(header + 12);
  if (dim_ == 0) throw ParseError(Kind::kDimMismatch, 8, "shard dim is zero");
  if (expected_dim && *expected_dim != dim_) {
    throw ParseError(Kind::kDimMismatch, 8,
                     "shard " + path.string() + " has dim " + std::to_string(dim_) +
                         ", expected " + std::to_string(*expected_dim));
  }

  const std::uint64_t record_bytes = 8 + std::uint64_t{4} * dim_;
  const std::uint64_t body = file_size_ - kShardHeaderBytes;
  const std::uint64_t complete = body / record_bytes;
  if (complete < count_) {
    throw ParseError(Kind::kTruncated, kShardHeaderBytes + complete * record_bytes,
                     "truncated record " + std::to_string(complete) + " of " +
                         std::to_string(count_) + " in " + path.string());
  }
  if (body != count_ * record_bytes) {
    throw ParseError(Kind::kSyntax, kShardHeaderBytes + count_ * record_bytes,
                     "trailing bytes after last record in " + path.string());
  }
  buffer_.resize(record_bytes);
  offset_ = kShardHeaderBytes;
}

bool ShardReader::next(WindowId& id, std::vector<float>& out) {
  if (read_ == count_) return false;
  in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
  if (!in_) {
    throw ParseError(ParseError::Kind::kTruncated, offset_, "short read in shard record");
  }
  id = detail::decode_u64(buffer_.data());
  out.resize(dim_);
  for (std::uint32_t j = 0; j < dim_; ++j) {
    const float v = detail::decode_f32(buffer_.data() + 8 + 4 * j);
    if (!std::isfinite(v)) {
      throw ParseError(ParseError::Kind::kNonFinite, offset_ + 8 + 4 * j,
                       "non-finite component " + std::to_string(j) + " of window " +
                           std::to_string(id));
    }
    out[j] = v;
  }
  offset_ += buffer_.size();
  ++read_;
  return true;
}

EmbeddingShard read_shard(const std::filesystem::path& path,
                          std::optional<std::uint32_t> expected_dim) {
  ShardReader reader(path, expected_dim);
  EmbeddingShard shard(reader.dim());
  std::unordered_set<WindowId> seen;
  seen.reserve(reader.count());
  const std::uint64_t record_bytes = 8 + std::uint64_t{4} * reader.dim();
  WindowId id = 0;
  std::vector<float> vec;
  while (reader.next(id, vec)) {
    if (!seen.insert(id).second) {
      throw ParseError(ParseError::Kind::kDuplicateId,
                       kShardHeaderBytes + (shard.size()) * record_bytes,
                       "duplicate window_id " + std::to_string(id));
    }
    shard.add(id, vec);
  }
  return shard;
}

}  // namespace pamcurate
