#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pamcurate/types.hpp"

namespace pamcurate {

/// A re-readable stream of (window_id, vector) records. Every scan visits the
/// same records in the same order.
class PointSource {
 public:
  /// Return false to stop the scan early.
  using Visitor = std::function<bool(WindowId, std::span<const float>)>;

  virtual ~PointSource() = default;
  virtual std::uint32_t dim() const = 0;
  virtual void scan(const Visitor& visit) const = 0;
};

/// Row-major in-memory points.
class MatrixSource final : public PointSource {
 public:
  MatrixSource(std::uint32_t dim, std::vector<float> data, std::vector<WindowId> ids = {});

  std::uint32_t dim() const override { return dim_; }
  void scan(const Visitor& visit) const override;

  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  const std::vector<float>& data() const { return data_; }
  const std::vector<WindowId>& ids() const { return ids_; }

 private:
  std::uint32_t dim_;
  std::vector<float> data_;
  std::vector<WindowId> ids_;  // defaults to row index
};

/// Streams a list of shard files in order, one record at a time.
class ShardFileSource final : public PointSource {
 public:
  /// Reads each header to determine the dim; all shards must agree.
  explicit ShardFileSource(std::vector<std::filesystem::path> paths);

  std::uint32_t dim() const override { return dim_; }
  void scan(const Visitor& visit) const override;

  const std::vector<std::filesystem::path>& paths() const { return paths_; }

 private:
  std::vector<std::filesystem::path> paths_;
  std::uint32_t dim_ = 0;
};

}  // namespace pamcurate
