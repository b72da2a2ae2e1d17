/**
 * Minimal block-parallel loop.  The worker count comes from the
 * COVERTSLOT_THREADS environment variable, falling back to the hardware
 * concurrency.  Callers must write results into per-index storage; with that
 * discipline the output is independent of the thread count.
 */
#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace covertslot {

inline std::size_t thread_budget() {
  if (const char* env = std::getenv("COVERTSLOT_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

inline void parallel_for(std::size_t count,
                         const std::function<void(std::size_t)>& body) {
  std::size_t workers = thread_budget();
  if (workers <= 1 || count < 2 * workers) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace covertslot
