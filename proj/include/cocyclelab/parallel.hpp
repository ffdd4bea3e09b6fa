#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cocyclelab {

/// Worker budget: COCYCLE_LAB_THREADS if set, else hardware concurrency.
inline int thread_budget() {
  if (const char* env = std::getenv("COCYCLE_LAB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [0, n) over contiguous index chunks.  Callers get
/// bit-stable results regardless of the worker count by writing each index
/// into its own slot and reducing sequentially afterwards.
inline void parallel_for(long n, const std::function<void(long)>& fn) {
  const int workers = std::min<long>(thread_budget(), std::max<long>(n, 1));
  if (workers <= 1 || n < 2) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const long lo = n * w / workers;
    const long hi = n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cocyclelab
