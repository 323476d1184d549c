#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>
#include <vector>

#include "pamcurate/deployment.hpp"
#include "pamcurate/geo_align.hpp"
#include "pamcurate/hkmeans.hpp"
#include "pamcurate/hsample.hpp"
#include "pamcurate/random.hpp"
#include "pamcurate/shard_io.hpp"
#include "pamcurate/window.hpp"

namespace {

using namespace pamcurate;
namespace fs = std::filesystem;

void BM_WindowIdOf(benchmark::State& state) {
  std::int64_t offset = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(window_id_of("MARS-1", "2023-06-01T00-00-00", offset));
    offset += 10;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_WindowIdOf);

DeploymentConfig bench_deployment() {
  DeploymentConfig c;
  const UnixSeconds t0 = 1672531200;
  for (int h = 0; h < 8; ++h) {
    Hydrophone hyd{"H" + std::to_string(h), GeoPoint::make(36.0 + 0.5 * h, -122.0), {}};
    for (int r = 0; r < 30; ++r) {
      hyd.recordings.push_back({"R" + std::to_string(r), t0 + r * 86400, 86400, 16000});
    }
    c.hydrophones.push_back(std::move(hyd));
  }
  c.validate();
  return c;
}

void BM_Align(benchmark::State& state) {
  const auto config = bench_deployment();
  Rng rng(4);
  std::vector<AisPulse> pulses(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pulses) {
    p.mmsi = 366000000 + rng.below(5000);
    p.time = 1672531200 + static_cast<UnixSeconds>(rng.below(30 * 86400));
    p.position = GeoPoint::make(35.9 + rng.uniform() * 4.0, -122.05 + rng.uniform() * 0.1);
  }
  const auto workers = static_cast<unsigned>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(align(pulses, config, kDefaultFenceSideKm, workers));
  }
  state.SetItemsProcessed(state.iterations() * pulses.size());
}
BENCHMARK(BM_Align)->Args({200000, 1})->Args({200000, 4})->Unit(benchmark::kMillisecond);

// Streams shards written once to the temp dir through a fixed hierarchy.
class StreamSelectFixture : public benchmark::Fixture {
 public:
  void SetUp(const benchmark::State&) override {
    if (!paths.empty()) return;
    const std::uint32_t dim = 64;
    Rng rng(5);
    const fs::path dir = fs::temp_directory_path() / "pamcurate_bench_stream";
    fs::create_directories(dir);
    std::vector<float> sample;
    for (int s = 0; s < 8; ++s) {
      EmbeddingShard shard(dim);
      std::vector<float> v(dim);
      for (int i = 0; i < 10000; ++i) {
        for (auto& x : v) x = static_cast<float>(rng.uniform() * 2 - 1);
        shard.add(mix64(s * 100000 + i), v);
        if (i % 10 == 0) sample.insert(sample.end(), v.begin(), v.end());
      }
      paths.push_back(dir / ("s" + std::to_string(s) + ".pamemb"));
      write_shard(shard, paths.back());
    }
    FitConfig cfg;
    cfg.level_ks = {256, 16, 4};
    cfg.batch_size = 1024;
    cfg.resample_rounds = 0;
    hierarchy = build_hierarchy(MatrixSource(dim, sample), cfg);
    const auto pops = count_populations(ShardFileSource(paths), hierarchy, 4);
    quotas = allocate_quotas(hierarchy, pops, 20000);
  }

  std::vector<fs::path> paths;
  ClusterHierarchy hierarchy;
  QuotaTree quotas;
};

BENCHMARK_DEFINE_F(StreamSelectFixture, Stream)(benchmark::State& state) {
  StreamOptions opts;
  opts.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream_select(paths, hierarchy, quotas, opts));
  }
  state.SetItemsProcessed(state.iterations() * 80000);
}
BENCHMARK_REGISTER_F(StreamSelectFixture, Stream)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
