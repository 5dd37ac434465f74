#pragma once

// Minimal fork-join helper. Thread count comes from the FERMISEA_THREADS
// environment variable (default: hardware concurrency). Work is split into
// fixed batches whose results are combined in batch order, so numerical
// output is independent of the thread count.

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fermisea {

inline unsigned thread_count() {
  if (const char* env = std::getenv("FERMISEA_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(batch_index) for batch_index in [0, n_batches).
inline void parallel_batches(std::size_t n_batches,
                             const std::function<void(std::size_t)>& fn) {
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(thread_count(), n_batches));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n_batches; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) {
    pool.emplace_back([=, &fn]() {
      for (std::size_t i = t; i < n_batches; i += n_threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace fermisea
