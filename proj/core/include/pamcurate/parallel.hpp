#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pamcurate {

/// Splits [0, n) into at most `workers` contiguous chunks and runs
/// fn(begin, end, chunk_index) on each, the first chunk on the calling
/// thread. Rethrows the first exception raised by any chunk.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(workers == 0 ? 1 : workers, n));
  if (chunks == 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&](std::size_t c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    try {
      fn(begin, end, c);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::jthread> threads;
  threads.reserve(chunks - 1);
  for (std::size_t c = 1; c < chunks; ++c) threads.emplace_back(run, c);
  run(0);
  threads.clear();
  if (error) std::rethrow_exception(error);
}

/// Number of chunks parallel_chunks will use.
inline std::size_t chunk_count(std::size_t n, unsigned workers) {
  return std::max<std::size_t>(1, std::min<std::size_t>(workers == 0 ? 1 : workers, n));
}

}  // namespace pamcurate
