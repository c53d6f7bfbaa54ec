#ifndef COSMOS_PARALLEL_HPP_
#define COSMOS_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace cosmos {

// Worker count: COSMOS_THREADS if set (clamped to [1, 64]), else hardware
// parallelism.
int worker_count();

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on n and chunk_size, never on the thread
// count, so per-chunk results merged in chunk order are deterministic under
// any parallelism. threads <= 0 means worker_count().
void parallel_chunks(std::size_t n, std::size_t chunk_size, int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return n == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
}

}  // namespace cosmos

#endif  // COSMOS_PARALLEL_HPP_
