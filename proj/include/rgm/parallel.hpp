#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rgm {

// Process-wide worker count used when a call does not pass one explicitly.
// 0 means std::thread::hardware_concurrency().
inline std::atomic<int>& default_thread_count() {
  static std::atomic<int> count{0};
  return count;
}

inline int resolve_threads(int requested) {
  if (requested <= 0) requested = default_thread_count().load();
  if (requested <= 0) requested = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, requested);
}

// Calls fn(i) for i in [0, count). Work is handed out dynamically, so fn must
// only write state owned by index i; results are then independent of thread
// scheduling. The first exception thrown by any fn is rethrown here.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, int threads = 0) {
  const int workers = static_cast<int>(std::min<std::size_t>(resolve_threads(threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace rgm
