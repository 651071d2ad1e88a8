#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace hesslab {

// Worker cap from HESSLAB_THREADS (default: hardware concurrency, at least 1).
int thread_budget();

// Splits [0, n) into a fixed number of chunks (independent of the thread
// count) so per-chunk partial results can be reduced in a stable order.
constexpr std::size_t kChunks = 64;

template <class F>
void parallel_chunks(std::size_t n, F&& body) {
  const std::size_t chunks = n < kChunks ? (n ? n : 1) : kChunks;
  auto run = [&](std::size_t c) {
    const std::size_t b = n * c / chunks, e = n * (c + 1) / chunks;
    body(c, b, e);
  };
  const int workers = thread_budget();
  if (workers <= 1 || n < 4096) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) run(c);
    });
  for (auto& t : pool) t.join();
}

inline std::size_t chunk_count(std::size_t n) { return n < kChunks ? (n ? n : 1) : kChunks; }

}  // namespace hesslab
