#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rvlevy {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> value{0};
  return value;
}
}  // namespace detail

/// Sets the worker count used by Monte Carlo loops; 0 means one per core.
inline void set_thread_count(unsigned n) { detail::thread_setting() = n; }

inline unsigned thread_count() {
  unsigned n = detail::thread_setting();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Replicates per work block. Block boundaries depend only on the replicate
/// count, never on the number of threads, which keeps merged results
/// bit-identical across thread counts.
inline constexpr std::size_t kBlockSize = 2048;

/// Runs `body(begin, end, acc)` over fixed blocks of [0, n) on a worker pool
/// and folds the per-block accumulators with `merge(into, from)` in block
/// order. `make_acc()` creates an empty accumulator.
template <class MakeAcc, class Body, class Merge>
auto block_reduce(std::size_t n, MakeAcc make_acc, Body body, Merge merge) {
  using Acc = decltype(make_acc());
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<Acc> partial;
  partial.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) partial.push_back(make_acc());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        const std::size_t begin = b * kBlockSize;
        body(begin, std::min(n, begin + kBlockSize), partial[b]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = blocks;
        return;
      }
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(thread_count(), blocks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  Acc total = make_acc();
  for (auto& p : partial) merge(total, p);
  return total;
}

/// Streaming mean/variance with an associative merge (Chan et al.).
struct MeanAccumulator {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  void merge(const MeanAccumulator& o) noexcept {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / total;
    m2 += o.m2 + delta * delta * static_cast<double>(n) *
                     static_cast<double>(o.n) / total;
    n += o.n;
  }

  double variance() const noexcept {
    return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  }
};

}  // namespace rvlevy
