#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hypoloop {

// Index fan-out with bounded workers. Results must be written to
// per-index slots by the callee; the first exception wins and is rethrown
// after all workers join.
inline void parallel_for(size_t count, int max_parallel, const std::function<void(size_t)>& fn) {
  if (count == 0) return;
  size_t workers = static_cast<size_t>(max_parallel < 1 ? 1 : max_parallel);
  if (workers > count) workers = count;
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace hypoloop
