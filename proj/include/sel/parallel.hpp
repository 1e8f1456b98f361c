#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sel {

// Worker budget: SEL_THREADS when set, otherwise a small multiple of the
// hardware concurrency.
inline int thread_budget() {
  if (const char* s = std::getenv("SEL_THREADS")) {
    int v = std::atoi(s);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc > 8 ? 8 : hc);
}

// Runs fn(i) for i in [0, n). Results must go into caller-owned slots so the
// outcome is independent of scheduling. The first exception is rethrown.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sel
