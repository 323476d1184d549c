#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pamcurate/hkmeans.hpp"
#include "pamcurate/types.hpp"

namespace pamcurate {

/// Sample size drawn from the clustered corpus in production.
inline constexpr std::uint64_t kPublishedClusterSamples = 323532;

/// Per-level target counts mirroring a ClusterHierarchy (level 0 = leaves).
struct QuotaTree {
  std::vector<std::vector<std::uint64_t>> quotas;
  std::vector<std::vector<std::uint64_t>> populations;

  const std::vector<std::uint64_t>& leaf_quotas() const { return quotas.front(); }
  std::uint64_t total() const;

  friend bool operator==(const QuotaTree&, const QuotaTree&) = default;
};

/// Splits `quota` equally among children, capping each at its population and
/// handing the excess to the uncapped ones until nothing moves. Remainders go
/// to the lowest-index children. quota must not exceed the total population.
std::vector<std::uint64_t> water_fill(std::uint64_t quota,
                                      std::span<const std::uint64_t> populations);

/// Top-down water-filling from a virtual root holding min(n, population).
/// Throws ValidationError when n == 0 or populations do not match the leaves.
QuotaTree allocate_quotas(const ClusterHierarchy& hierarchy,
                          std::span<const std::uint64_t> leaf_populations, std::uint64_t n);

/// Counting pass: points per leaf.
std::vector<std::uint64_t> count_populations(const PointSource& source,
                                             const ClusterHierarchy& hierarchy,
                                             unsigned workers = 1);

struct Candidate {
  WindowId window_id = 0;
  double distance = 0.0;

  /// Strict ranking: closer first, smaller window_id on equal distance.
  friend bool operator<(const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.window_id < b.window_id;
  }
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Bounded per-leaf selections. Each leaf keeps at most `capacity` candidates
/// as a max-heap so the worst one is the eviction candidate.
class SelectionState {
 public:
  SelectionState() = default;
  explicit SelectionState(std::vector<std::uint64_t> capacities);

  /// Inserts if there is room or the candidate ranks before the current
  /// worst, which is then evicted. Returns true if inserted.
  bool offer(std::uint32_t leaf, Candidate candidate);

  /// Per-leaf union truncated to capacity. Candidates present in both with
  /// the same window_id are kept once. Throws ValidationError if the
  /// capacities differ.
  void merge(const SelectionState& other);

  const std::vector<std::uint64_t>& capacities() const { return capacities_; }
  std::size_t leaf_count() const { return capacities_.size(); }
  std::size_t size() const;
  std::size_t size(std::uint32_t leaf) const { return heaps_[leaf].size(); }

  /// Leaf contents in ranking order.
  std::vector<Candidate> sorted(std::uint32_t leaf) const;

  /// Compares capacities and per-leaf contents.
  friend bool operator==(const SelectionState& a, const SelectionState& b);

 private:
  std::vector<std::uint64_t> capacities_;
  std::vector<std::vector<Candidate>> heaps_;
};

SelectionState merge(SelectionState a, const SelectionState& b);

/// Offers every point of the source to `state`.
void select_from(const PointSource& source, const ClusterHierarchy& hierarchy,
                 SelectionState& state);

struct StreamStats {
  std::size_t shards_accepted = 0;
  std::size_t shards_rejected = 0;
  std::size_t shards_skipped = 0;  // already covered by a checkpoint
  std::uint64_t points = 0;
  std::vector<std::string> rejected;
};

struct StreamOptions {
  unsigned workers = 1;
  /// Shards already folded into the initial state.
  std::vector<std::string> completed;
  /// Called after each shard is merged, with the state and completed shard
  /// names so far. Runs under a lock.
  std::function<void(const SelectionState&, const std::vector<std::string>&)> on_progress;
};

/// Streams shard files into a selection. Shards whose dim differs from the
/// hierarchy (or fail to parse) are rejected and tallied; the run
/// continues. The result does not depend on shard order or worker count.
SelectionState stream_select(const std::vector<std::filesystem::path>& shards,
                             const ClusterHierarchy& hierarchy, const QuotaTree& quotas,
                             const StreamOptions& options = {}, StreamStats* stats = nullptr,
                             SelectionState initial = {});

/// Manifest entries (source hkmeans) for every selected window. Throws
/// ValidationError if a window is missing from `windows`.
std::vector<ManifestEntry> emit(const SelectionState& selection,
                                const ClusterHierarchy& hierarchy,
                                const std::unordered_map<WindowId, AudioWindow>& windows);

/// Window ids held by the selection.
std::vector<WindowId> selected_ids(const SelectionState& selection);

/// Resumable snapshot of a selection run.
struct SelectionCheckpoint {
  SelectionState state;
  std::vector<std::string> completed_shards;
  std::string model_digest;

  friend bool operator==(const SelectionCheckpoint&, const SelectionCheckpoint&) = default;
};

/// Checkpoint layout (little-endian): "PAMSEL01", u32 format version (1),
/// u32 leaf count, per leaf { u64 capacity, u64 size, size x { u64 id, f64 distance } }
/// in ranking order, u32 digest length + bytes, u32 shard count, per shard
/// u32 length + bytes.
void write_checkpoint(const SelectionCheckpoint& checkpoint, const std::filesystem::path& path);
SelectionCheckpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace pamcurate
