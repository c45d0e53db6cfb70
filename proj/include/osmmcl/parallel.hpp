#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace osmmcl {

/// Runs fn(block) for every block in [0, num_blocks) on up to `workers` threads. Blocks
/// are claimed in contiguous chunks, so any per-block result is independent of the worker
/// count. The first exception thrown by fn is rethrown on the calling thread.
template <class Fn>
void parallel_for_blocks(std::size_t num_blocks, int workers, Fn&& fn) {
  const std::size_t threads =
      std::min<std::size_t>(num_blocks, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t b = 0; b < num_blocks; ++b) fn(b);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = num_blocks * t / threads;
    const std::size_t end = num_blocks * (t + 1) / threads;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t b = begin; b < end; ++b) fn(b);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace osmmcl
