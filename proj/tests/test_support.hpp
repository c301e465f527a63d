#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "permcap/estimators.hpp"

namespace permcap::testing {

/// Running mean and standard error of a sample.
struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return sum / n; }
  double variance() const {
    const double m = mean();
    return std::max(0.0, sum_sq / n - m * m);
  }
  double se() const { return std::sqrt(variance() / n); }
};

/// Standard error of a Bernoulli proportion, floored so that an empty count
/// still allows a deviation of one event.
inline double proportion_se(double p, std::uint64_t n) {
  return std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Labels with the cases of `base` moved by swapping the first r cases with
/// the first r controls (counting from the given offsets).
inline std::vector<std::uint8_t> swap_labels(std::vector<std::uint8_t> base,
                                             int r, int case_offset = 0,
                                             int control_offset = 0) {
  std::vector<std::size_t> cases;
  std::vector<std::size_t> controls;
  for (std::size_t i = 0; i < base.size(); ++i) {
    (base[i] ? cases : controls).push_back(i);
  }
  for (int j = 0; j < r; ++j) {
    base[cases[(case_offset + j) % cases.size()]] = 0;
    base[controls[(control_offset + j) % controls.size()]] = 1;
  }
  return base;
}

/// Labels with the first m0 entries 0 and the remaining m1 entries 1.
inline std::vector<std::uint8_t> block_labels(int m0, int m1) {
  std::vector<std::uint8_t> l(m0 + m1, 0);
  for (int i = m0; i < m0 + m1; ++i) l[i] = 1;
  return l;
}

}  // namespace permcap::testing
