#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace seqmon {

inline unsigned effective_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

// Runs fn(lo, hi) over a partition of [0, n) into contiguous blocks, one per
// thread.  fn must only write to state owned by indices in its block.
template <class F>
void parallel_blocks(std::size_t n, unsigned threads, F&& fn) {
  if (n == 0) return;
  unsigned t = effective_threads(threads);
  if (t > n) t = static_cast<unsigned>(n);
  if (t <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w) {
    std::size_t lo = n * w / t;
    std::size_t hi = n * (w + 1) / t;
    pool.emplace_back([lo, hi, &fn] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

// Runs fn(i) for every i in [0, n), blocked as above.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  parallel_blocks(n, threads, [&fn](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) fn(i);
  });
}

}  // namespace seqmon
