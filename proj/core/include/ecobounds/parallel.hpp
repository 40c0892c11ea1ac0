#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace ecobounds {

// Process-wide worker budget. Library routines never exceed it; nested
// parallel regions run serially inside a worker.
void set_thread_budget(int threads);
int thread_budget();

// Flag value if given, else ECOBOUNDS_THREADS, else hardware concurrency.
int resolve_thread_budget(std::optional<int> flag);

// Runs body(i) for i in [0, n). Results must be written to per-index slots;
// an exception thrown by the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

inline constexpr std::size_t kReduceChunk = 512;

// Sums map(begin, end) over fixed-size chunks, then combines the chunk
// results pairwise in a fixed tree order. The association order depends only
// on n, so the result is bit-identical for every thread count.
template <class T, class Map>
T chunked_sum(std::size_t n, const T& zero, Map map) {
  const std::size_t chunks = n == 0 ? 0 : (n + kReduceChunk - 1) / kReduceChunk;
  if (chunks == 0) return zero;
  std::vector<T> partial(chunks, zero);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kReduceChunk;
    const std::size_t end = begin + kReduceChunk < n ? begin + kReduceChunk : n;
    partial[c] = map(begin, end);
  });
  for (std::size_t width = 1; width < chunks; width *= 2) {
    for (std::size_t i = 0; i + width < chunks; i += 2 * width) {
      partial[i] = partial[i] + partial[i + width];
    }
  }
  return partial[0];
}

}  // namespace ecobounds
