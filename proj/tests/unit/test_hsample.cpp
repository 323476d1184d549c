#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "desk_fixture.hpp"
#include "pamcurate/errors.hpp"
#include "pamcurate/hsample.hpp"
#include "pamcurate/random.hpp"
#include "pamcurate/shard_io.hpp"
#include "synth.hpp"

namespace pamcurate {
namespace {

namespace fs = std::filesystem;

// Leaves on a line at 0, 10, 20, ... with the given parents (raw metric).
ClusterHierarchy line_hierarchy(std::vector<std::vector<std::uint32_t>> parents,
                                std::uint32_t leaves) {
  ClusterHierarchy h;
  h.normalized = false;
  CentroidSet leaf{1, leaves, 1, {}, std::vector<std::uint64_t>(leaves, 0)};
  for (std::uint32_t c = 0; c < leaves; ++c) leaf.centroids.push_back(10.0f * c);
  h.levels.push_back(leaf);
  std::uint32_t k = leaves;
  for (const auto& p : parents) {
    const std::uint32_t up = *std::max_element(p.begin(), p.end()) + 1;
    CentroidSet s{static_cast<std::uint32_t>(h.levels.size() + 1), up, 1,
                  std::vector<float>(up, 0.0f), std::vector<std::uint64_t>(up, 0)};
    h.levels.push_back(s);
    EXPECT_EQ(p.size(), k);
    k = up;
  }
  h.parents = std::move(parents);
  h.validate();
  return h;
}

TEST(WaterFill, Examples) {
  EXPECT_EQ(water_fill(9, std::vector<std::uint64_t>{8, 1, 1}),
            (std::vector<std::uint64_t>{7, 1, 1}));
  EXPECT_EQ(water_fill(10, std::vector<std::uint64_t>{100, 100}),
            (std::vector<std::uint64_t>{5, 5}));
  EXPECT_EQ(water_fill(7, std::vector<std::uint64_t>{100, 100, 100}),
            (std::vector<std::uint64_t>{3, 2, 2}));
  EXPECT_EQ(water_fill(12, std::vector<std::uint64_t>{2, 0, 50, 3}),
            (std::vector<std::uint64_t>{2, 0, 7, 3}));
  EXPECT_EQ(water_fill(0, std::vector<std::uint64_t>{4, 4}), (std::vector<std::uint64_t>{0, 0}));
  EXPECT_THROW(water_fill(10, std::vector<std::uint64_t>{4, 4}), ValidationError);
}

// Exhaustive small-case oracle: the allocation maximizing the minimum share,
// then lexicographically, equals water-filling.
TEST(WaterFill, MatchesMaxMinOracle) {
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::uint64_t> pops(1 + rng.below(4));
    for (auto& p : pops) p = rng.below(7);
    const std::uint64_t total = std::accumulate(pops.begin(), pops.end(), std::uint64_t{0});
    const std::uint64_t q = total == 0 ? 0 : rng.below(total + 1);
    const auto got = water_fill(q, pops);
    ASSERT_EQ(std::accumulate(got.begin(), got.end(), std::uint64_t{0}), q);
    for (std::size_t i = 0; i < pops.size(); ++i) ASSERT_LE(got[i], pops[i]);
    // Max-min fairness: nobody below the cap can be raised without lowering
    // someone at or below their level.
    for (std::size_t i = 0; i < pops.size(); ++i) {
      if (got[i] == pops[i]) continue;
      for (std::size_t j = 0; j < pops.size(); ++j) ASSERT_LE(got[j], got[i] + 1);
    }
    // Remainders go to lower indices.
    for (std::size_t i = 0; i + 1 < pops.size(); ++i) {
      if (got[i] < pops[i] && got[i + 1] < pops[i + 1]) ASSERT_GE(got[i], got[i + 1]);
    }
  }
}

TEST(Quotas, SaturationAndEvenSplit) {
  const auto h = line_hierarchy({{0, 0, 1, 1}}, 4);
  const std::vector<std::uint64_t> pops = {3, 4, 5, 6};
  const auto all = allocate_quotas(h, pops, 1000);
  EXPECT_EQ(all.leaf_quotas(), pops);
  EXPECT_EQ(all.total(), 18u);
  const auto ten = allocate_quotas(h, std::vector<std::uint64_t>{50, 50, 50, 50}, 10);
  EXPECT_EQ(ten.quotas[1], (std::vector<std::uint64_t>{5, 5}));
  EXPECT_EQ(ten.leaf_quotas(), (std::vector<std::uint64_t>{3, 2, 3, 2}));
  EXPECT_THROW(allocate_quotas(h, pops, 0), ValidationError);
  EXPECT_THROW(allocate_quotas(h, std::vector<std::uint64_t>{1, 2}, 5), ValidationError);
}

TEST(Quotas, TreeInvariants) {
  Rng rng(8);
  const auto h = line_hierarchy({{0, 0, 1, 1, 2, 2, 2, 3}, {0, 0, 1, 1}}, 8);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::uint64_t> pops(8);
    for (auto& p : pops) p = rng.below(rng.below(2) ? 5 : 500);
    const std::uint64_t total = std::accumulate(pops.begin(), pops.end(), std::uint64_t{0});
    if (total == 0) continue;
    const std::uint64_t n = 1 + rng.below(total + 20);
    const auto q = allocate_quotas(h, pops, n);
    EXPECT_EQ(q.total(), std::min(n, total));
    for (std::size_t l = 0; l + 1 < h.depth(); ++l) {
      std::vector<std::uint64_t> rolled(h.levels[l + 1].k, 0);
      for (std::size_t c = 0; c < q.quotas[l].size(); ++c) {
        EXPECT_LE(q.quotas[l][c], q.populations[l][c]);
        rolled[h.parents[l][c]] += q.quotas[l][c];
      }
      EXPECT_EQ(rolled, q.quotas[l + 1]);
    }
  }
}

TEST(Selection, ReplacementTrace) {
  SelectionState s({2});
  EXPECT_TRUE(s.offer(0, {105, 5}));
  EXPECT_TRUE(s.offer(0, {101, 1}));
  EXPECT_TRUE(s.offer(0, {103, 3}));  // evicts 5
  EXPECT_EQ(s.sorted(0), (std::vector<Candidate>{{101, 1}, {103, 3}}));
  EXPECT_TRUE(s.offer(0, {102, 2}));  // evicts 3
  EXPECT_EQ(s.sorted(0), (std::vector<Candidate>{{101, 1}, {102, 2}}));
  EXPECT_FALSE(s.offer(0, {200, 2}));  // tie loses to the smaller id
  EXPECT_TRUE(s.offer(0, {100, 2}));   // tie won by the smaller id
  EXPECT_EQ(s.sorted(0), (std::vector<Candidate>{{101, 1}, {100, 2}}));
  SelectionState zero({0});
  EXPECT_FALSE(zero.offer(0, {1, 0}));
}

SelectionState random_state(Rng& rng, const std::vector<std::uint64_t>& caps, WindowId id_space) {
  SelectionState s(caps);
  std::set<WindowId> used;
  for (int i = 0; i < 60; ++i) {
    const WindowId id = rng.below(id_space);
    if (!used.insert(id).second) continue;  // a window is offered once
    // Leaf and distance are functions of the id, as they are for real data.
    s.offer(static_cast<std::uint32_t>(id % caps.size()),
            {id, static_cast<double>((id * 2654435761u) % 97)});
  }
  return s;
}

TEST(Selection, MergeLaws) {
  Rng rng(5);
  const std::vector<std::uint64_t> caps = {3, 0, 7, 1};
  for (int t = 0; t < 200; ++t) {
    const auto a = random_state(rng, caps, 200);
    const auto b = random_state(rng, caps, 200);
    const auto c = random_state(rng, caps, 200);
    EXPECT_EQ(merge(a, b), merge(b, a));
    EXPECT_EQ(merge(merge(a, b), c), merge(a, merge(b, c)));
    EXPECT_EQ(merge(a, SelectionState(caps)), a);
    EXPECT_EQ(merge(a, a), a);
  }
  EXPECT_THROW(merge(SelectionState({1}), SelectionState({2})), ValidationError);
}

struct Instance {
  ClusterHierarchy hierarchy;
  QuotaTree quotas;
  std::vector<EmbeddingShard> shards;
  std::vector<synth::ScoredPoint> scored;
};

Instance make_instance(std::uint64_t seed, std::size_t n, std::size_t min_shards = 1) {
  Rng rng(seed);
  const std::uint32_t dim = 2 + static_cast<std::uint32_t>(rng.below(6));
  auto spec = synth::separated_blobs(dim, {0.7, 0.2, 0.1}, 3.0, 1.0, n, seed);
  const auto pts = synth::gen_mixture(spec);
  Instance inst;
  FitConfig cfg;
  cfg.seed = seed;
  cfg.level_ks = {9, 3};
  cfg.batch_size = 128;
  inst.hierarchy = build_hierarchy(MatrixSource(dim, pts.data), cfg);
  std::vector<std::uint64_t> pops(inst.hierarchy.leaf_count(), 0);
  inst.shards.assign(std::max<std::size_t>(min_shards, 1 + rng.below(5)), EmbeddingShard(dim));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // Coarse grid values produce exact distance ties.
    std::vector<float> v(pts.data.begin() + i * dim, pts.data.begin() + (i + 1) * dim);
    if (seed % 2 == 0) {
      for (auto& x : v) x = std::round(x * 2.0f) / 2.0f;
      if (std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; })) v[0] = 1.0f;
    }
    const WindowId id = mix64(seed * 1000003 + i);
    inst.shards[rng.below(inst.shards.size())].add(id, v);
    double d = 0;
    const auto leaf = assign_leaf(v, inst.hierarchy, &d);
    ++pops[leaf];
    inst.scored.push_back({id, leaf, d});
  }
  inst.quotas = allocate_quotas(inst.hierarchy, pops, 1 + rng.below(n));
  return inst;
}

std::vector<fs::path> write_shards(const Instance& inst, const fs::path& dir) {
  std::vector<fs::path> paths;
  for (std::size_t s = 0; s < inst.shards.size(); ++s) {
    paths.push_back(dir / ("s" + std::to_string(s) + ".pamemb"));
    write_shard(inst.shards[s], paths.back());
  }
  return paths;
}

TEST(StreamSelect, MatchesOfflineOracle) {
  const auto dir = fixture::scratch_dir("stream_select");
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto inst = make_instance(seed, 400 + 100 * seed);
    auto paths = write_shards(inst, dir);
    const auto oracle = synth::exact_topn_per_cluster(inst.scored, inst.quotas.leaf_quotas());
    StreamOptions opts;
    for (unsigned workers : {1u, 3u}) {
      opts.workers = workers;
      std::reverse(paths.begin(), paths.end());
      StreamStats stats;
      const auto state = stream_select(paths, inst.hierarchy, inst.quotas, opts, &stats);
      EXPECT_EQ(selected_ids(state), oracle) << "seed " << seed;
      EXPECT_EQ(state.size(), inst.quotas.total());
      EXPECT_EQ(stats.shards_accepted, paths.size());
      EXPECT_EQ(stats.points, inst.scored.size());
    }
  }
}

TEST(StreamSelect, SplitShardsEqualOneShard) {
  const auto dir = fixture::scratch_dir("stream_split");
  const auto inst = make_instance(3, 800);
  const auto paths = write_shards(inst, dir);
  EmbeddingShard all(inst.shards[0].dim());
  for (const auto& s : inst.shards) {
    for (std::size_t i = 0; i < s.size(); ++i) all.add(s.id(i), s.vector(i));
  }
  write_shard(all, dir / "all.pamemb");
  EXPECT_EQ(stream_select(paths, inst.hierarchy, inst.quotas),
            stream_select({dir / "all.pamemb"}, inst.hierarchy, inst.quotas));
}

TEST(StreamSelect, SaturatedQuotasSelectEverything) {
  const auto dir = fixture::scratch_dir("stream_all");
  auto inst = make_instance(5, 300);
  std::vector<std::uint64_t> pops(inst.hierarchy.leaf_count(), 0);
  for (const auto& p : inst.scored) ++pops[p.cluster];
  inst.quotas = allocate_quotas(inst.hierarchy, pops, 1000000);
  const auto state = stream_select(write_shards(inst, dir), inst.hierarchy, inst.quotas);
  EXPECT_EQ(state.size(), 300u);
}

TEST(StreamSelect, BadShardsRejectedAndTallied) {
  const auto dir = fixture::scratch_dir("stream_bad");
  const auto inst = make_instance(7, 300);
  auto paths = write_shards(inst, dir);
  EmbeddingShard wrong(inst.hierarchy.dim() + 1);
  wrong.add(1, std::vector<float>(inst.hierarchy.dim() + 1, 1.0f));
  write_shard(wrong, dir / "wrong.pamemb");
  std::ofstream(dir / "garbage.pamemb") << "not a shard";
  auto with_bad = paths;
  with_bad.push_back(dir / "wrong.pamemb");
  with_bad.push_back(dir / "garbage.pamemb");
  StreamStats stats;
  const auto state = stream_select(with_bad, inst.hierarchy, inst.quotas, {}, &stats);
  EXPECT_EQ(stats.shards_rejected, 2u);
  EXPECT_EQ(stats.rejected.size(), 2u);
  EXPECT_EQ(state, stream_select(paths, inst.hierarchy, inst.quotas));
}

TEST(StreamSelect, ResumeFromPartialStateMatchesFullRun) {
  const auto dir = fixture::scratch_dir("stream_resume");
  const auto inst = make_instance(9, 700, 3);
  const auto paths = write_shards(inst, dir);
  const auto full = stream_select(paths, inst.hierarchy, inst.quotas);
  std::vector<fs::path> first(paths.begin(), paths.begin() + 1);
  const auto partial = stream_select(first, inst.hierarchy, inst.quotas);
  StreamOptions opts;
  opts.completed = {first[0].string()};
  StreamStats stats;
  const auto resumed = stream_select(paths, inst.hierarchy, inst.quotas, opts, &stats, partial);
  EXPECT_EQ(resumed, full);
  EXPECT_EQ(stats.shards_skipped, 1u);
}

TEST(StreamSelect, ProgressCallbackSeesEveryShard) {
  const auto dir = fixture::scratch_dir("stream_progress");
  const auto inst = make_instance(11, 500);
  const auto paths = write_shards(inst, dir);
  std::size_t calls = 0;
  StreamOptions opts;
  opts.workers = 2;
  opts.on_progress = [&](const SelectionState& s, const std::vector<std::string>& done) {
    ++calls;
    EXPECT_EQ(done.size(), calls);
    EXPECT_LE(s.size(), inst.quotas.total());
  };
  stream_select(paths, inst.hierarchy, inst.quotas, opts);
  EXPECT_EQ(calls, paths.size());
}

TEST(Emit, EntriesCarryPathsAndWindows) {
  const auto h = line_hierarchy({{0, 0, 1}}, 3);
  SelectionState s({2, 1, 1});
  s.offer(0, {11, 0.5});
  s.offer(2, {7, 0.1});
  std::unordered_map<WindowId, AudioWindow> windows = {{11, {11, "H", "R", 110}},
                                                       {7, {7, "H", "R", 70}}};
  const auto entries = emit(s, h, windows);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].window_id, 7u);
  EXPECT_EQ(entries[0].cluster_path, (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(entries[1].cluster_path, (std::vector<std::uint32_t>{0, 0}));
  EXPECT_EQ(entries[1].offset_s, 110);
  EXPECT_EQ(entries[0].source, Source::kHkmeans);
  EXPECT_TRUE(emit(SelectionState({2, 1, 1}), h, {}).empty());
  windows.erase(7);
  EXPECT_THROW(emit(s, h, windows), ValidationError);
}

TEST(Emit, DeskRunSelectsExactlyN) {
  const auto dir = fixture::scratch_dir("emit_desk");
  auto inst = make_instance(2, 1000);
  std::vector<std::uint64_t> pops(inst.hierarchy.leaf_count(), 0);
  for (const auto& p : inst.scored) ++pops[p.cluster];
  inst.quotas = allocate_quotas(inst.hierarchy, pops, 100);
  const auto state = stream_select(write_shards(inst, dir), inst.hierarchy, inst.quotas);
  std::unordered_map<WindowId, AudioWindow> windows;
  for (const auto& p : inst.scored) windows[p.window_id] = {p.window_id, "H", "R", 0};
  EXPECT_EQ(emit(state, inst.hierarchy, windows).size(), 100u);
}

TEST(Checkpoint, RoundTrips) {
  const auto dir = fixture::scratch_dir("checkpoint");
  Rng rng(6);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::uint64_t> caps(1 + rng.below(6));
    for (auto& c : caps) c = rng.below(10);
    SelectionCheckpoint cp{random_state(rng, caps, 1u << 20), {}, "sha256:" + std::to_string(t)};
    for (std::size_t i = rng.below(4); i > 0; --i) cp.completed_shards.push_back("/x/ß" + std::to_string(i));
    write_checkpoint(cp, dir / "c.ckpt");
    ASSERT_EQ(read_checkpoint(dir / "c.ckpt"), cp);
  }
}

TEST(Checkpoint, VersionAndMagicChecked) {
  const auto dir = fixture::scratch_dir("checkpoint_bad");
  write_checkpoint({SelectionState({1}), {}, "d"}, dir / "c.ckpt");
  std::vector<char> bytes;
  {
    std::ifstream in(dir / "c.ckpt", std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto put = [&](const std::vector<char>& b) {
    std::ofstream out(dir / "x.ckpt", std::ios::binary);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  auto v2 = bytes;
  v2[8] = 2;
  put(v2);
  try {
    read_checkpoint(dir / "x.ckpt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::kBadVersion);
  }
  auto bad = bytes;
  bad[0] = 'Q';
  put(bad);
  EXPECT_THROW(read_checkpoint(dir / "x.ckpt"), ParseError);
  bytes.pop_back();
  put(bytes);
  EXPECT_THROW(read_checkpoint(dir / "x.ckpt"), ParseError);
}

}  // namespace
}  // namespace pamcurate
