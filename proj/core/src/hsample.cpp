#include "pamcurate/hsample.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <mutex>
#include <numeric>
#include <thread>

#include "binary_io.hpp"
#include "pamcurate/errors.hpp"
#include "pamcurate/parallel.hpp"
#include "pamcurate/shard_io.hpp"

namespace pamcurate {

std::uint64_t QuotaTree::total() const {
  if (quotas.empty()) return 0;
  return std::accumulate(quotas.front().begin(), quotas.front().end(), std::uint64_t{0});
}

std::vector<std::uint64_t> water_fill(std::uint64_t quota,
                                      std::span<const std::uint64_t> populations) {
  const std::uint64_t available =
      std::accumulate(populations.begin(), populations.end(), std::uint64_t{0});
  if (quota > available) {
    throw ValidationError("quota " + std::to_string(quota) + " exceeds population " +
                          std::to_string(available));
  }
  std::vector<std::uint64_t> alloc(populations.size(), 0);
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < populations.size(); ++i) {
    if (populations[i] > 0) open.push_back(i);
  }
  // Children whose whole population fits under the current level are capped;
  // the rest share what is left, remainders to the lowest indices.
  std::uint64_t remaining = quota;
  while (!open.empty()) {
    const std::uint64_t share = remaining / open.size();
    std::vector<std::size_t> still_open;
    for (std::size_t i : open) {
      if (populations[i] <= share) {
        alloc[i] = populations[i];
        remaining -= populations[i];
      } else {
        still_open.push_back(i);
      }
    }
    if (still_open.size() == open.size()) {
      std::uint64_t extra = remaining % open.size();
      for (std::size_t i : open) {
        alloc[i] = share + (extra > 0 ? 1 : 0);
        if (extra > 0) --extra;
      }
      break;
    }
    open = std::move(still_open);
  }
  return alloc;
}

QuotaTree allocate_quotas(const ClusterHierarchy& hierarchy,
                          std::span<const std::uint64_t> leaf_populations, std::uint64_t n) {
  if (n == 0) throw ValidationError("target sample size must be positive");
  if (leaf_populations.size() != hierarchy.leaf_count()) {
    throw ValidationError("population count does not match the number of leaves");
  }
  const std::size_t depth = hierarchy.depth();
  QuotaTree tree;
  tree.populations.resize(depth);
  tree.quotas.resize(depth);
  tree.populations[0].assign(leaf_populations.begin(), leaf_populations.end());
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    tree.populations[l + 1].assign(hierarchy.levels[l + 1].k, 0);
    for (std::size_t c = 0; c < tree.populations[l].size(); ++c) {
      tree.populations[l + 1][hierarchy.parents[l][c]] += tree.populations[l][c];
    }
  }

  const auto& top = tree.populations[depth - 1];
  const std::uint64_t total = std::accumulate(top.begin(), top.end(), std::uint64_t{0});
  tree.quotas[depth - 1] = water_fill(std::min(n, total), top);

  for (std::size_t l = depth - 1; l > 0; --l) {
    const std::size_t child_level = l - 1;
    tree.quotas[child_level].assign(hierarchy.levels[child_level].k, 0);
    std::vector<std::vector<std::size_t>> children(hierarchy.levels[l].k);
    for (std::size_t c = 0; c < hierarchy.levels[child_level].k; ++c) {
      children[hierarchy.parents[child_level][c]].push_back(c);
    }
    for (std::size_t p = 0; p < children.size(); ++p) {
      std::vector<std::uint64_t> pops;
      pops.reserve(children[p].size());
      for (std::size_t c : children[p]) pops.push_back(tree.populations[child_level][c]);
      const auto split = water_fill(tree.quotas[l][p], pops);
      for (std::size_t i = 0; i < children[p].size(); ++i) {
        tree.quotas[child_level][children[p][i]] = split[i];
      }
    }
  }
  return tree;
}

std::vector<std::uint64_t> count_populations(const PointSource& source,
                                             const ClusterHierarchy& hierarchy,
                                             unsigned workers) {
  if (source.dim() != hierarchy.dim()) {
    throw ValidationError("source dim " + std::to_string(source.dim()) +
                          " does not match hierarchy dim " + std::to_string(hierarchy.dim()));
  }
  constexpr std::size_t kBatch = 4096;
  const std::uint32_t dim = source.dim();
  std::vector<std::uint64_t> counts(hierarchy.leaf_count(), 0);
  std::vector<float> batch;
  std::vector<std::uint32_t> leaves;
  auto flush = [&] {
    const std::size_t n = batch.size() / dim;
    leaves.resize(n);
    parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
      for (std::size_t i = begin; i < end; ++i) {
        leaves[i] = assign_leaf(std::span<const float>(batch).subspan(i * dim, dim), hierarchy,
                                nullptr);
      }
    });
    for (std::uint32_t leaf : leaves) ++counts[leaf];
    batch.clear();
  };
  source.scan([&](WindowId, std::span<const float> v) {
    batch.insert(batch.end(), v.begin(), v.end());
    if (batch.size() == kBatch * dim) flush();
    return true;
  });
  if (!batch.empty()) flush();
  return counts;
}

SelectionState::SelectionState(std::vector<std::uint64_t> capacities)
    : capacities_(std::move(capacities)), heaps_(capacities_.size()) {}

bool SelectionState::offer(std::uint32_t leaf, Candidate candidate) {
  auto& heap = heaps_.at(leaf);
  const std::uint64_t cap = capacities_[leaf];
  if (cap == 0) return false;
  if (heap.size() < cap) {
    heap.push_back(candidate);
    std::push_heap(heap.begin(), heap.end());
    return true;
  }
  if (!(candidate < heap.front())) return false;
  std::pop_heap(heap.begin(), heap.end());
  heap.back() = candidate;
  std::push_heap(heap.begin(), heap.end());
  return true;
}

void SelectionState::merge(const SelectionState& other) {
  if (other.capacities_ != capacities_) {
    throw ValidationError("cannot merge selections with different quotas");
  }
  for (std::size_t leaf = 0; leaf < heaps_.size(); ++leaf) {
    const auto& theirs = other.heaps_[leaf];
    if (theirs.empty()) continue;
    auto& mine = heaps_[leaf];
    mine.insert(mine.end(), theirs.begin(), theirs.end());
    std::sort(mine.begin(), mine.end(), [](const Candidate& a, const Candidate& b) {
      return a.window_id != b.window_id ? a.window_id < b.window_id : a.distance < b.distance;
    });
    mine.erase(std::unique(mine.begin(), mine.end(),
                           [](const Candidate& a, const Candidate& b) {
                             return a.window_id == b.window_id;
                           }),
               mine.end());
    std::sort(mine.begin(), mine.end());
    if (mine.size() > capacities_[leaf]) mine.resize(capacities_[leaf]);
    std::make_heap(mine.begin(), mine.end());
  }
}

std::size_t SelectionState::size() const {
  std::size_t n = 0;
  for (const auto& h : heaps_) n += h.size();
  return n;
}

std::vector<Candidate> SelectionState::sorted(std::uint32_t leaf) const {
  std::vector<Candidate> out = heaps_.at(leaf);
  std::sort(out.begin(), out.end());
  return out;
}

bool operator==(const SelectionState& a, const SelectionState& b) {
  if (a.capacities_ != b.capacities_) return false;
  for (std::uint32_t leaf = 0; leaf < a.heaps_.size(); ++leaf) {
    if (a.sorted(leaf) != b.sorted(leaf)) return false;
  }
  return true;
}

SelectionState merge(SelectionState a, const SelectionState& b) {
  a.merge(b);
  return a;
}

void select_from(const PointSource& source, const ClusterHierarchy& hierarchy,
                 SelectionState& state) {
  source.scan([&](WindowId id, std::span<const float> v) {
    double distance = 0.0;
    const std::uint32_t leaf = assign_leaf(v, hierarchy, &distance);
    state.offer(leaf, Candidate{id, distance});
    return true;
  });
}

SelectionState stream_select(const std::vector<std::filesystem::path>& shards,
                             const ClusterHierarchy& hierarchy, const QuotaTree& quotas,
                             const StreamOptions& options, StreamStats* stats,
                             SelectionState initial) {
  SelectionState state = initial.leaf_count() == 0 ? SelectionState(quotas.leaf_quotas())
                                                   : std::move(initial);
  if (state.capacities() != quotas.leaf_quotas()) {
    throw ValidationError("initial selection does not match the quotas");
  }
  StreamStats local_stats;
  std::vector<std::string> completed = options.completed;
  std::vector<std::filesystem::path> pending;
  for (const auto& p : shards) {
    if (std::find(completed.begin(), completed.end(), p.string()) != completed.end()) {
      ++local_stats.shards_skipped;
    } else {
      pending.push_back(p);
    }
  }

  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<float> vec;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      SelectionState part(quotas.leaf_quotas());
      std::uint64_t points = 0;
      bool ok = true;
      std::string why;
      try {
        ShardReader reader(pending[i], hierarchy.dim());
        WindowId id = 0;
        while (reader.next(id, vec)) {
          double distance = 0.0;
          const std::uint32_t leaf = assign_leaf(vec, hierarchy, &distance);
          part.offer(leaf, Candidate{id, distance});
          ++points;
        }
      } catch (const ParseError& e) {
        ok = false;
        why = e.what();
      } catch (const ValidationError& e) {
        ok = false;
        why = e.what();
      }
      std::lock_guard lock(mutex);
      if (!ok) {
        ++local_stats.shards_rejected;
        local_stats.rejected.push_back(pending[i].string() + ": " + why);
        continue;
      }
      state.merge(part);
      ++local_stats.shards_accepted;
      local_stats.points += points;
      completed.push_back(pending[i].string());
      if (options.on_progress) options.on_progress(state, completed);
    }
  };

  const unsigned n_workers = static_cast<unsigned>(
      std::max<std::size_t>(1, std::min<std::size_t>(options.workers, pending.size())));
  {
    std::vector<std::jthread> threads;
    for (unsigned w = 1; w < n_workers; ++w) threads.emplace_back(worker);
    worker();
  }
  std::sort(local_stats.rejected.begin(), local_stats.rejected.end());
  if (stats) *stats = std::move(local_stats);
  return state;
}

std::vector<WindowId> selected_ids(const SelectionState& selection) {
  std::vector<WindowId> ids;
  ids.reserve(selection.size());
  for (std::uint32_t leaf = 0; leaf < selection.leaf_count(); ++leaf) {
    for (const auto& c : selection.sorted(leaf)) ids.push_back(c.window_id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<ManifestEntry> emit(const SelectionState& selection,
                                const ClusterHierarchy& hierarchy,
                                const std::unordered_map<WindowId, AudioWindow>& windows) {
  std::vector<ManifestEntry> entries;
  entries.reserve(selection.size());
  for (std::uint32_t leaf = 0; leaf < selection.leaf_count(); ++leaf) {
    if (selection.size(leaf) == 0) continue;
    const auto path = hierarchy.path_of_leaf(leaf);
    for (const auto& c : selection.sorted(leaf)) {
      auto it = windows.find(c.window_id);
      if (it == windows.end()) {
        throw ValidationError("selected window " + std::to_string(c.window_id) +
                              " is not in the deployment");
      }
      ManifestEntry e;
      e.window_id = c.window_id;
      e.hydrophone_id = it->second.hydrophone_id;
      e.recording_id = it->second.recording_id;
      e.offset_s = it->second.offset_s;
      e.source = Source::kHkmeans;
      e.cluster_path = path;
      entries.push_back(std::move(e));
    }
  }
  canonicalize(entries);
  return entries;
}

namespace {

constexpr char kCheckpointMagic[8] = {'P', 'A', 'M', 'S', 'E', 'L', '0', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

void write_checkpoint(const SelectionCheckpoint& checkpoint, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);
  const auto& state = checkpoint.state;
  w.u32(static_cast<std::uint32_t>(state.leaf_count()));
  for (std::uint32_t leaf = 0; leaf < state.leaf_count(); ++leaf) {
    w.u64(state.capacities()[leaf]);
    const auto entries = state.sorted(leaf);
    w.u64(entries.size());
    for (const auto& c : entries) {
      w.u64(c.window_id);
      w.f64(c.distance);
    }
  }
  w.str(checkpoint.model_digest);
  w.u32(static_cast<std::uint32_t>(checkpoint.completed_shards.size()));
  for (const auto& s : checkpoint.completed_shards) w.str(s);
  detail::write_file_atomic(path, w.buffer().data(), w.buffer().size());
}

SelectionCheckpoint read_checkpoint(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file_bytes(path));
  char magic[8];
  if (r.remaining() < 8) {
    throw ParseError(ParseError::Kind::kBadMagic, 0, "not a selection checkpoint");
  }
  r.bytes(magic, 8, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw ParseError(ParseError::Kind::kBadMagic, 0, "bad checkpoint magic in " + path.string());
  }
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw ParseError(ParseError::Kind::kBadVersion, 8,
                     "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t leaves = r.u32("leaf count");
  std::vector<std::uint64_t> capacities(leaves);
  std::vector<std::vector<Candidate>> contents(leaves);
  for (std::uint32_t leaf = 0; leaf < leaves; ++leaf) {
    capacities[leaf] = r.u64("capacity");
    const std::uint64_t at = r.offset();
    const std::uint64_t size = r.u64("leaf size");
    if (size > capacities[leaf]) {
      throw ParseError(ParseError::Kind::kSyntax, at, "leaf holds more than its capacity");
    }
    r.need(size * 16, "leaf entries");
    contents[leaf].resize(size);
    for (auto& c : contents[leaf]) {
      c.window_id = r.u64("window id");
      c.distance = r.f64("distance");
    }
  }
  SelectionCheckpoint cp;
  cp.state = SelectionState(capacities);
  for (std::uint32_t leaf = 0; leaf < leaves; ++leaf) {
    for (const auto& c : contents[leaf]) cp.state.offer(leaf, c);
  }
  cp.model_digest = r.str("model digest");
  const std::uint32_t shards = r.u32("shard count");
  for (std::uint32_t i = 0; i < shards; ++i) cp.completed_shards.push_back(r.str("shard name"));
  if (r.remaining() != 0) {
    throw ParseError(ParseError::Kind::kSyntax, r.offset(), "trailing bytes in checkpoint");
  }
  return cp;
}

}  // namespace pamcurate
