#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nmpdee {

/// Runs body(begin, end) over [0, n) split into contiguous static chunks, one
/// per worker. Work items must write only to their own slots; the first
/// exception thrown by any worker is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (n == 0) return;
  const std::size_t workers = std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, n);
  if (workers == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace nmpdee
