#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ldlab {

// Number of worker threads to use for a task that splits into `jobs`
// independent pieces. Results never depend on this value — work is always
// partitioned by job index, threads only decide who executes which piece.
inline unsigned worker_count(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (jobs < hw) hw = static_cast<unsigned>(jobs);
  return hw == 0 ? 1 : hw;
}

// Run fn(job_index) for job_index in [0, jobs). Deterministic: each job is a
// self-contained unit (its own RNG stream / output slot), so the schedule
// cannot affect values.
inline void parallel_for_jobs(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  unsigned workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t j = w; j < jobs; j += workers) fn(j);
    });
  }
  for (auto& t : pool) t.join();
}

// Split [0, n) into `pieces` near-equal ranges; returns the half-open range
// of piece `k`. Deterministic partition used by the sharded Monte Carlo.
inline std::pair<std::uint64_t, std::uint64_t> shard_range(std::uint64_t n, std::uint64_t pieces,
                                                           std::uint64_t k) {
  std::uint64_t base = n / pieces, extra = n % pieces;
  std::uint64_t lo = k * base + (k < extra ? k : extra);
  std::uint64_t len = base + (k < extra ? 1 : 0);
  return {lo, lo + len};
}

}  // namespace ldlab
