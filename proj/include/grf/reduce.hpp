#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

#include "grf/common.hpp"

// Deterministic reductions and data-parallel loops.
//
// Every sum in the library goes through pairwise_sum, which uses a fixed
// binary tree over element indices. Parallel loops split work into chunks of
// a fixed size (independent of the thread count), and reductions combine the
// per-chunk partials sequentially, so results are bitwise identical for any
// --threads value.

namespace grf {

namespace detail {
inline std::atomic<int>& thread_count_slot() {
  static std::atomic<int> n{1};
  return n;
}
inline constexpr std::size_t kChunk = 4096;

inline double pairwise_sum_rec(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_rec(v, half) + pairwise_sum_rec(v + half, n - half);
}
}  // namespace detail

inline void set_thread_count(int n) { detail::thread_count_slot() = n < 1 ? 1 : n; }
inline int thread_count() { return detail::thread_count_slot().load(); }

inline double pairwise_sum(std::span<const double> v) {
  return detail::pairwise_sum_rec(v.data(), v.size());
}

// body(begin, end) must only write to locations in [begin, end).
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const int nt = thread_count();
  if (nt <= 1 || n <= detail::kChunk) {
    body(0, n);
    return;
  }
  const std::size_t nchunks = (n + detail::kChunk - 1) / detail::kChunk;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      const std::size_t b = c * detail::kChunk;
      body(b, std::min(n, b + detail::kChunk));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt) - 1);
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// Deterministic parallel reduction: per-chunk pairwise partials combined in
// chunk order by one final pairwise pass. The chunk grid is fixed by n alone,
// so the summation tree is identical for every thread count.
inline double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  if (n == 0) return 0.0;
  const std::size_t nchunks = (n + detail::kChunk - 1) / detail::kChunk;
  std::vector<double> partial(nchunks, 0.0);
  auto do_chunk = [&](std::size_t c) {
    const std::size_t b = c * detail::kChunk;
    const std::size_t e = std::min(n, b + detail::kChunk);
    std::vector<double> buf(e - b);
    for (std::size_t i = b; i < e; ++i) buf[i - b] = term(i);
    partial[c] = pairwise_sum(buf);
  };
  const int nt = thread_count();
  if (nt <= 1 || nchunks == 1) {
    for (std::size_t c = 0; c < nchunks; ++c) do_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= nchunks) return;
        do_chunk(c);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }
  return pairwise_sum(partial);
}

}  // namespace grf
