#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kcagree {

/// Calls fn(lo, hi) on disjoint chunks of [0, total), one per worker.
template <class Fn>
void parallel_ranges(std::uint64_t total, unsigned threads, Fn&& fn) {
  threads = std::max(1U, threads);
  if (threads == 1 || total < 2) {
    fn(std::uint64_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (total + threads - 1) / threads;
  std::exception_ptr err;
  std::mutex mu;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t lo = t * chunk, hi = std::min(total, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        fn(lo, hi);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

/// Evaluates fn(i) for every trial index and returns the results in index
/// order, so the output never depends on the thread count.
template <class Fn>
auto parallel_trials(std::uint64_t trials, unsigned threads, Fn&& fn) {
  using R = decltype(fn(std::uint64_t{0}));
  std::vector<R> out(trials);
  parallel_ranges(trials, threads, [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t i = lo; i < hi; ++i) out[i] = fn(i);
  });
  return out;
}

}  // namespace kcagree
