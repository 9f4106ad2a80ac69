#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

namespace mlglm {

// Batched exp, accurate to ~1 ulp for x in [-745, 0] and exact 0 below.
// Branch-light and auto-vectorizable; hot path of every potential evaluation.
inline void exp_batch(const double* __restrict x, double* __restrict y, int n) {
  constexpr double kLog2e = 1.4426950408889634074;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShift = 6755399441055744.0;  // 1.5 * 2^52, round-to-nearest trick
  for (int i = 0; i < n; ++i) {
    double xi = x[i] < -745.0 ? -745.0 : x[i];
    double k = (xi * kLog2e + kShift) - kShift;
    double r = xi - k * kLn2Hi;
    r -= k * kLn2Lo;
    double r2 = r * r;
    double p0 = 1.0 + r * (1.0 + r2 * (1.0 / 6 + r2 * (1.0 / 120 + r2 * (1.0 / 5040 + r2 * (1.0 / 362880 + r2 * (1.0 / 39916800 + r2 * (1.0 / 6227020800.0)))))));
    double p1 = 0.5 + r2 * (1.0 / 24 + r2 * (1.0 / 720 + r2 * (1.0 / 40320 + r2 * (1.0 / 3628800 + r2 * (1.0 / 479001600 + r2 * (1.0 / 87178291200.0))))));
    double p = p0 + r2 * p1;
    // 2^k in two halves so k down to -1490 stays clear of subnormal underflow
    double kh = (k * 0.5 + kShift) - kShift;
    auto b1 = static_cast<std::uint64_t>(static_cast<std::int64_t>(kh) + 1023) << 52;
    auto b2 = static_cast<std::uint64_t>(static_cast<std::int64_t>(k - kh) + 1023) << 52;
    double v = p * __builtin_bit_cast(double, b1) * __builtin_bit_cast(double, b2);
    y[i] = x[i] < -745.0 ? 0.0 : v;
  }
}

// log(sum_i exp(e_i)) with max shift; returns -inf for empty input.
inline double log_sum_exp(const double* e, int n) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = e[i] > m ? e[i] : m;
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(e[i] - m);
  return m + std::log(s);
}

// Runs fn(i) for i in [0, n). Work is claimed per index from an atomic
// counter, so any thread count produces the same per-index results; callers
// must write outputs into per-index slots to stay deterministic.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  int nw = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nw - 1);
  for (int t = 1; t < nw; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// Global default used by operations that parallelize internally.
int default_threads();
void set_default_threads(int n);

}  // namespace mlglm
