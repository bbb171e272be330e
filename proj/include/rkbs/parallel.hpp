#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rkbs {

// Worker count used by the library's parallel loops. 0 means one per
// hardware thread. Results never depend on this value.
void set_thread_count(std::size_t n);
std::size_t thread_count();

namespace detail {
// Set on pool workers; nested parallel loops run inline.
inline thread_local bool in_worker = false;
}  // namespace detail

// Runs fn(i) for i in [0, n) across the worker pool. Each index is handled
// by exactly one worker; callers write into per-index slots and reduce in
// index order afterwards. The first exception thrown is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1 || detail::in_worker) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::in_worker = true;
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rkbs
