#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rotset {

// Splits [0, total) into at most `threads` contiguous chunks and runs
// fn(begin, end) on each. Chunk boundaries depend only on (total, threads),
// so any computation whose outputs are written to disjoint per-index slots
// is schedule-independent. The first exception thrown by a worker is
// rethrown on the calling thread.
template <typename Fn>
inline void parallel_for_chunks(std::size_t total, int threads, Fn&& fn) {
  if (threads < 1) threads = 1;
  const std::size_t nthreads = std::min<std::size_t>(
      static_cast<std::size_t>(threads), total == 0 ? 1 : total);
  if (nthreads <= 1) {
    fn(std::size_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = (total + nthreads - 1) / nthreads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(total, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, &error, &error_mutex, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rotset
