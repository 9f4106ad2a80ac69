#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mlglm/rng.hpp"

namespace mlglm {

inline double mean(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / v.size();
}

inline double sample_variance(const std::vector<double>& v) {
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

inline double stderr_of_mean(const std::vector<double>& v) {
  return std::sqrt(sample_variance(v) / v.size());
}

// Bootstrap standard deviation of the sample variance of `v`.
inline double bootstrap_sd_of_variance(const std::vector<double>& v, int resamples,
                                       std::uint64_t seed) {
  RandomStream rs(mix_seed(seed, {kTagBootstrap}));
  const int n = static_cast<int>(v.size());
  std::vector<double> vars(resamples);
  std::vector<double> tmp(n);
  for (int b = 0; b < resamples; ++b) {
    for (int i = 0; i < n; ++i) {
      auto idx = static_cast<int>(rs.next_u64() % static_cast<std::uint64_t>(n));
      tmp[i] = v[idx];
    }
    vars[b] = sample_variance(tmp);
  }
  double m = mean(vars);
  double s = 0.0;
  for (double x : vars) s += (x - m) * (x - m);
  return std::sqrt(s / (resamples - 1));
}

}  // namespace mlglm
