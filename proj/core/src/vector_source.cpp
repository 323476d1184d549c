#include "pamcurate/vector_source.hpp"

#include "pamcurate/errors.hpp"
#include "pamcurate/shard_io.hpp"

namespace pamcurate {

MatrixSource::MatrixSource(std::uint32_t dim, std::vector<float> data, std::vector<WindowId> ids)
    : dim_(dim), data_(std::move(data)), ids_(std::move(ids)) {
  if (dim_ == 0) throw ValidationError("MatrixSource: dim must be positive");
  if (data_.size() % dim_ != 0) {
    throw ValidationError("MatrixSource: data size is not a multiple of dim");
  }
  if (ids_.empty()) {
    ids_.resize(size());
    for (std::size_t i = 0; i < ids_.size(); ++i) ids_[i] = i;
  } else if (ids_.size() != size()) {
    throw ValidationError("MatrixSource: id count does not match row count");
  }
}

void MatrixSource::scan(const Visitor& visit) const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (!visit(ids_[i], row(i))) return;
  }
}

ShardFileSource::ShardFileSource(std::vector<std::filesystem::path> paths)
    : paths_(std::move(paths)) {
  if (paths_.empty()) throw ValidationError("no shard files given");
  for (const auto& p : paths_) {
    ShardReader reader(p);
    if (dim_ == 0) {
      dim_ = reader.dim();
    } else if (reader.dim() != dim_) {
      throw ValidationError("shard " + p.string() + " has dim " + std::to_string(reader.dim()) +
                            ", expected " + std::to_string(dim_));
    }
  }
}

void ShardFileSource::scan(const Visitor& visit) const {
  WindowId id = 0;
  std::vector<float> vec;
  for (const auto& p : paths_) {
    ShardReader reader(p, dim_);
    while (reader.next(id, vec)) {
      if (!visit(id, vec)) return;
    }
  }
}

}  // namespace pamcurate
