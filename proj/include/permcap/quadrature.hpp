#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace permcap {

/// Tolerances for the adaptive one-dimensional integrals.
///
/// A subinterval set is accepted once the summed error estimate is below
/// max(abs_tol * scale, rel_tol * |integral|), where `scale` is a closed-form
/// upper bound on the integral supplied by the caller. Measuring the absolute
/// tolerance against that bound keeps probabilities of order 1e-30 resolved
/// to a relative accuracy instead of being accepted as zero.
struct QuadratureConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 400;

  /// Throws DomainError unless both tolerances are positive and the
  /// subdivision budget is at least one.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
  bool converged = true;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  std::array<double, 7> left{};
  std::array<double, 7> right{};
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    left[j] = f(center - dx);
    right[j] = f(center + dx);
    const double pair = left[j] + right[j];
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  // QUADPACK error heuristic: |K - G| rescaled by the integrand's variation.
  const double mean = 0.5 * kronrod;
  double variation = kKronrodWeights[7] * std::fabs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    variation += kKronrodWeights[j] *
                 (std::fabs(left[j] - mean) + std::fabs(right[j] - mean));
  }
  variation *= std::fabs(half);
  double error = std::fabs((kronrod - gauss) * half);
  if (variation != 0.0 && error != 0.0) {
    error = variation * std::min(1.0, std::pow(200.0 * error / variation, 1.5));
  }
  return {lo, hi, kronrod * half, error};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [lo, hi].
/// Always returns the best estimate; `converged` is false when the budget ran
/// out before the tolerance was met.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double lo, double hi,
                                    const QuadratureConfig& cfg,
                                    double scale = 1.0) {
  QuadratureResult out;
  if (!(hi > lo)) return out;

  std::priority_queue<detail::Segment> heap;
  const auto first = detail::gauss_kronrod_15(f, lo, hi);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  int subdivisions = 1;

  auto tolerance = [&] {
    return std::max(cfg.abs_tol * scale, cfg.rel_tol * std::fabs(value));
  };
  while (error > tolerance()) {
    if (subdivisions >= cfg.max_subdivisions) {
      out.converged = false;
      break;
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // Interval cannot be split further in double precision.
      out.converged = false;
      heap.push(worst);
      break;
    }
    const auto left = detail::gauss_kronrod_15(f, worst.lo, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.hi);
    heap.push(left);
    heap.push(right);
    ++subdivisions;

    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
  }
  // Final estimate re-summed from the segments, smallest magnitude first.
  std::vector<double> values;
  values.reserve(heap.size());
  error = 0.0;
  while (!heap.empty()) {
    values.push_back(heap.top().value);
    error += heap.top().error;
    heap.pop();
  }
  std::sort(values.begin(), values.end(),
            [](double a, double b) { return std::fabs(a) < std::fabs(b); });
  value = 0.0;
  for (double v : values) value += v;
  out.value = value;
  out.error = error;
  out.subdivisions = subdivisions;
  return out;
}

}  // namespace permcap
