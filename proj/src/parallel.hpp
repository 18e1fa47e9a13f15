#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace linseq::detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls fn(i) for i in [begin, end), striped across threads. fn must only
// write to per-index state. The first exception thrown is rethrown.
template <class F>
void parallel_for(std::size_t begin, std::size_t end, unsigned threads, F&& fn) {
  threads = resolve_threads(threads);
  const std::size_t count = end > begin ? end - begin : 0;
  if (threads <= 1 || count < 2) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = begin + t; i < end; i += threads) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace linseq::detail
