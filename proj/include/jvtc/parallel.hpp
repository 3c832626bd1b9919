#pragma once

#include <functional>
#include <thread>
#include <vector>

#include "jvtc/types.hpp"

namespace jvtc {

/// Runs fn(i) for i in [0, n) on contiguous blocks, one per worker. Callers
/// must write disjoint outputs per index; results are then independent of the
/// schedule and of the worker count. num_threads = 0 picks the hardware count.
inline void parallel_for(Index n, int num_threads, const std::function<void(Index)>& fn) {
  unsigned workers = num_threads > 0 ? static_cast<unsigned>(num_threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<Index>(n, 1)));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const Index chunk = (n + static_cast<Index>(workers) - 1) / static_cast<Index>(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const Index lo = static_cast<Index>(w) * chunk;
    const Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (Index i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace jvtc
