#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rotsym {

/// Worker-count override: ROTSYM_WORKERS if set, else 1. All parallel
/// paths produce identical results for any worker count; the default
/// keeps single-machine runs simple.
inline int default_worker_count() {
  if (const char* env = std::getenv("ROTSYM_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads, statically
/// chunked by index. Callers write results into per-index slots so the
/// outcome does not depend on scheduling.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers < 1) workers = 1;
  if (workers == 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int n_threads = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += n_threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace rotsym
