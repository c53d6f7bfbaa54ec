#include "cosmos/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace cosmos {

int worker_count() {
  if (const char* env = std::getenv("COSMOS_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n < 1) n = 1;
      if (n > 64) n = 64;
      return n;
    } catch (...) {
      // fall through to hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_chunks(std::size_t n, std::size_t chunk_size, int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t chunks = chunk_count(n, chunk_size);
  if (threads <= 0) threads = worker_count();
  const std::size_t nthreads =
      std::min<std::size_t>(static_cast<std::size_t>(threads), chunks);

  if (nthreads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t begin = c * chunk_size;
      fn(c, begin, std::min(begin + chunk_size, n));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= chunks) return;
        const std::size_t begin = c * chunk_size;
        fn(c, begin, std::min(begin + chunk_size, n));
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace cosmos
