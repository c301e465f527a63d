#pragma once

// Ground truth for the closed forms: exact permutation p-values by
// enumeration, Monte Carlo p-values, and samplers for both reference
// distributions.

#include <cstdint>
#include <span>
#include <vector>

#include "permcap/estimators.hpp"

namespace permcap {

struct OracleConfig {
  std::uint64_t max_exact_orbit = 2'000'000;
  std::uint64_t mc_draws = 10'000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Exact p(y, t): the fraction of the N label allocations x_k with
/// <x_k, y> >= t (two-sided: |<x_k, y>| >= |t|). `y` need not be centered.
/// Statistics within a few ulps of t count as ties and are included, so the
/// observed allocation always counts itself. Throws OrbitTooLarge when
/// N > cfg.max_exact_orbit.
double exact_p(std::span<const double> y, const GroupSizes& g, double t,
               Sided sided, const OracleConfig& cfg = {});
double exact_p(const StandardizedPair& sp, Sided sided, const OracleConfig& cfg = {});

struct McResult {
  double estimate = 0.0;
  double se = 0.0;
  std::uint64_t draws = 0;
};

/// Monte Carlo p-value over cfg.mc_draws allocations, the first of which is
/// the observed one; the estimate is therefore at least 1/M.
McResult mc_p(const StandardizedPair& sp, Sided sided, const OracleConfig& cfg = {});

/// Row-major batch of vectors.
struct PointBatch {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
};

/// `count` points uniform on S^d (vectors of length d + 1).
PointBatch sample_uniform_sphere(int d, std::size_t count, std::uint64_t seed);

/// `count` points uniform on {y : |y| = 1, <y, xc> = rho_tilde}; with
/// `sum_zero` the points are also orthogonal to the all-ones vector, which
/// then must be orthogonal to xc. rho_tilde = +-1 returns copies of +-xc.
PointBatch sample_subsphere(std::span<const double> xc, double rho_tilde,
                            std::size_t count, std::uint64_t seed,
                            bool sum_zero = true);

/// All allocations of a small design, for repeated exact p-values.
class OrbitTable {
 public:
  OrbitTable(const GroupSizes& g, std::uint64_t max_orbit = 200'000);

  std::size_t size() const noexcept { return count_; }
  const GroupSizes& groups() const noexcept { return g_; }
  /// Case indices of allocation k.
  std::span<const int> cases(std::size_t k) const {
    return {members_.data() + k * g_.m1, static_cast<std::size_t>(g_.m1)};
  }
  double p_value(std::span<const double> y, double t, Sided sided) const;

 private:
  GroupSizes g_;
  std::size_t count_ = 0;
  std::vector<int> members_;
};

namespace reference {

/// Single-threaded enumeration.
double exact_p(std::span<const double> y, const GroupSizes& g, double t,
               Sided sided, const OracleConfig& cfg = {});

}  // namespace reference

}  // namespace permcap
