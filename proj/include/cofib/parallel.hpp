#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cofib {

// Worker count: hardware concurrency, overridden by the COFIB_THREADS env
// var (positive integer) when set.
inline int thread_budget() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("COFIB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<int>(std::min(v, 1024L));
  }
  return n;
}

// Runs body(begin, end) over disjoint chunks of [0, n). Chunks are handed
// out dynamically, so the body must only write to locations owned by its
// indices; under that contract results are deterministic regardless of
// scheduling. The first exception thrown by any worker is rethrown.
inline void parallel_for(std::size_t n, std::size_t grain,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const int threads = thread_budget();
  if (threads <= 1 || n <= grain) {
    body(0, n);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(grain);
      if (begin >= n) break;
      try {
        body(begin, std::min(n, begin + grain));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = std::min<std::size_t>(threads, (n + grain - 1) / grain) - 1;
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  parallel_for(n, 64, body);
}

}  // namespace cofib
