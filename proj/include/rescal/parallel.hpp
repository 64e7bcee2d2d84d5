#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rescal {

/** Thread budget: RESCAL_THREADS if set and positive, else hardware cores. */
inline int thread_budget() {
  if (const char* env = std::getenv("RESCAL_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/**
 * Run fn(i) for i in [0, n).  Work items must be independent and write only to
 * their own slots; output is then identical for any thread count.
 */
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int threads = thread_budget();
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int spawn = std::min<std::size_t>(threads, n);
  pool.reserve(spawn);
  for (int k = 0; k < spawn; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace rescal
