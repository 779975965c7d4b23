#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kcurate {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once and results are written by index, so the caller
/// observes the same output for any worker count. The first exception thrown
/// by any task is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(workers, n)) - 1;
  std::vector<std::jthread> threads;
  threads.reserve(spawn);
  for (unsigned t = 0; t < spawn; ++t) threads.emplace_back(body);
  body();
  threads.clear();
  if (error) std::rethrow_exception(error);
}

/// Ordered parallel map.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, unsigned workers, Fn&& fn)
    -> std::vector<decltype(fn(items.front()))> {
  std::vector<decltype(fn(items.front()))> out(items.size());
  parallel_for(items.size(), workers, [&](std::size_t i) { out[i] = fn(items[i]); });
  return out;
}

}  // namespace kcurate
