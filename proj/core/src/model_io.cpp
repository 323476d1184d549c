#include "pamcurate/model_io.hpp"

#include <cstring>

#include "binary_io.hpp"
#include "pamcurate/errors.hpp"

namespace pamcurate {
namespace {

constexpr char kModelMagic[8] = {'P', 'A', 'M', 'H', 'K', 'M', '0', '1'};

}  // namespace

void write_model(const ClusterHierarchy& h, const std::filesystem::path& path) {
  h.validate();
  detail::ByteWriter w;
  w.bytes(kModelMagic, sizeof kModelMagic);
  w.u32(static_cast<std::uint32_t>(h.depth()));
  w.u32(h.dim());
  w.u8(h.normalized ? 1 : 0);
  for (const auto& set : h.levels) {
    w.u32(set.k);
    for (float v : set.centroids) w.f32(v);
    for (std::uint64_t c : set.counts) w.u64(c);
  }
  for (const auto& parent : h.parents) {
    for (std::uint32_t p : parent) w.u32(p);
  }
  detail::write_file_atomic(path, w.buffer().data(), w.buffer().size());
}

ClusterHierarchy read_model(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file_bytes(path));
  char magic[8];
  if (r.remaining() < 8) throw ParseError(ParseError::Kind::kBadMagic, 0, "not a model file");
  r.bytes(magic, 8, "magic");
  if (std::memcmp(magic, kModelMagic, 8) != 0) {
    throw ParseError(ParseError::Kind::kBadMagic, 0, "bad model magic in " + path.string());
  }
  ClusterHierarchy h;
  const std::uint32_t depth = r.u32("level count");
  const std::uint32_t dim = r.u32("dim");
  const std::uint8_t flag = r.u8("normalized flag");
  if (depth == 0 || dim == 0 || flag > 1) {
    throw ParseError(ParseError::Kind::kSyntax, 8, "bad model header");
  }
  h.normalized = flag == 1;
  for (std::uint32_t l = 0; l < depth; ++l) {
    CentroidSet set;
    set.level = l + 1;
    set.dim = dim;
    const std::uint64_t at = r.offset();
    set.k = r.u32("k");
    if (set.k == 0) throw ParseError(ParseError::Kind::kSyntax, at, "level with k = 0");
    r.need(std::uint64_t{set.k} * dim * 4 + std::uint64_t{set.k} * 8, "centroids");
    set.centroids.resize(std::size_t{set.k} * dim);
    for (float& v : set.centroids) v = r.f32("centroid");
    set.counts.resize(set.k);
    for (auto& c : set.counts) c = r.u64("count");
    h.levels.push_back(std::move(set));
  }
  for (std::uint32_t l = 0; l + 1 < depth; ++l) {
    std::vector<std::uint32_t> parent(h.levels[l].k);
    for (auto& p : parent) p = r.u32("parent");
    h.parents.push_back(std::move(parent));
  }
  if (r.remaining() != 0) {
    throw ParseError(ParseError::Kind::kSyntax, r.offset(), "trailing bytes in model file");
  }
  try {
    h.validate();
  } catch (const ValidationError& e) {
    throw ParseError(ParseError::Kind::kSyntax, 0, e.what());
  }
  return h;
}

}  // namespace pamcurate
