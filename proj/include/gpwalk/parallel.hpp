#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace gpwalk {

// Worker count: GPWALK_WORKERS env var, else hardware concurrency.
inline unsigned default_worker_count() {
  if (const char* env = std::getenv("GPWALK_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

// Fan n independent replications out over a fixed worker pool. Each worker
// owns a static contiguous chunk and writes results by replication index, so
// the output is identical for any worker count. fn must be pure in the index
// (derive randomness from it), and exceptions propagate from worker 0's
// perspective after joining.
template <class R, class Fn>
std::vector<R> run_replications(std::size_t n, unsigned workers, Fn&& fn) {
  std::vector<R> out(n);
  if (n == 0) return out;
  if (workers < 1) workers = 1;
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    if (lo >= n) break;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace gpwalk
