#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace phasewave {

/// Worker count: PHASEWAVE_THREADS if set to a positive integer, otherwise the
/// hardware concurrency. Work is split into index ranges whose contents never
/// depend on the count, so results are identical for every setting.
inline int worker_threads() {
  static const int count = [] {
    if (const char* env = std::getenv("PHASEWAVE_THREADS")) {
      try {
        const int n = std::stoi(env);
        if (n > 0) return n;
      } catch (...) {
      }
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }();
  return count;
}

namespace detail {

/// Calls fn(begin, end) over disjoint chunks of [0, count). Chunk boundaries
/// are fixed multiples of `grain`, independent of the worker count.
template <class Fn>
void parallel_chunks(std::size_t count, std::size_t grain, Fn&& fn) {
  if (count == 0) return;
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t chunks = (count + grain - 1) / grain;
  const std::size_t workers = std::min<std::size_t>(worker_threads(), chunks);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * grain;
    fn(begin, std::min(count, begin + grain));
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t grain = 16) {
  parallel_chunks(count, grain, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace detail
}  // namespace phasewave
