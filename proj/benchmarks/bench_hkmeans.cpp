#include <benchmark/benchmark.h>

#include <vector>

#include "pamcurate/hkmeans.hpp"
#include "pamcurate/random.hpp"

namespace {

using namespace pamcurate;

std::vector<float> random_points(std::size_t n, std::uint32_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> data(n * dim);
  for (auto& x : data) x = static_cast<float>(rng.uniform() * 2 - 1);
  return data;
}

CentroidSet random_centroids(std::uint32_t k, std::uint32_t dim) {
  CentroidSet set;
  set.k = k;
  set.dim = dim;
  set.centroids = random_points(k, dim, 99);
  set.counts.assign(k, 0);
  return set;
}

// Args: k, dim. The production leaf level is k=6000 at dim 2048; these stay
// small enough to run in seconds.
void BM_NearestCentroid(benchmark::State& state) {
  const auto k = static_cast<std::uint32_t>(state.range(0));
  const auto dim = static_cast<std::uint32_t>(state.range(1));
  const auto set = random_centroids(k, dim);
  const auto queries = random_points(64, dim, 1);
  std::size_t q = 0;
  for (auto _ : state) {
    const std::span<const float> x(queries.data() + (q++ % 64) * dim, dim);
    benchmark::DoNotOptimize(nearest_centroid(x, set));
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["flops/query"] = 3.0 * k * dim;
}
BENCHMARK(BM_NearestCentroid)->Args({64, 128})->Args({400, 256})->Args({1024, 512});

void BM_MinibatchFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::uint32_t dim = 32;
  const MatrixSource source(dim, random_points(n, dim, 2));
  FitConfig cfg;
  cfg.batch_size = 1024;
  cfg.workers = static_cast<unsigned>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(minibatch_fit(source, 64, cfg));
  }
  state.SetItemsProcessed(state.iterations() * n * cfg.passes);
}
BENCHMARK(BM_MinibatchFit)->Args({20000, 1})->Args({20000, 4})->Unit(benchmark::kMillisecond);

}  // namespace
