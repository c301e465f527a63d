#pragma once

// Counting over the orbit of a binary label vector with m0 controls and m1
// cases. All counts are carried as natural logarithms; -inf encodes zero.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace permcap {

/// Group sizes of a two-sample design.
struct GroupSizes {
  int m0 = 0;  ///< controls (label 0)
  int m1 = 0;  ///< cases (label 1)

  GroupSizes() = default;
  /// Throws DomainError unless m0, m1 >= 1 and m0 + m1 >= 4.
  GroupSizes(int controls, int cases);
  /// Group sizes for counting only: m0, m1 >= 1 without the n >= 4 floor
  /// that the sphere geometry needs.
  static GroupSizes for_counting(int controls, int cases);

  int n() const noexcept { return m0 + m1; }
  int m_min() const noexcept { return m0 < m1 ? m0 : m1; }
  /// Effective sphere dimension n - 2.
  int dimension() const noexcept { return m0 + m1 - 2; }
};

/// Pairwise swap distances among x1, x2 and the conditioning point xc:
/// r1 = r(x1, xc), r2 = r(x2, xc), r3 = r(x1, x2).
struct SwapTriple {
  int r1 = 0;
  int r2 = 0;
  int r3 = 0;
  bool operator==(const SwapTriple&) const = default;
};

struct IntRange {
  int lo = 0;
  int hi = -1;
  bool empty() const noexcept { return hi < lo; }
};

/// u(r) = 1 - r (1/m0 + 1/m1), formed from integers so that u is exactly
/// 1, 0 or -1 whenever the rational value is.
double inner_product_at_swap(int r, const GroupSizes& g);

struct OrbitSize {
  double log_n = 0.0;
  std::optional<std::uint64_t> exact;  ///< present when N < 2^63
};

OrbitSize orbit_size(const GroupSizes& g);
/// log N = log C(m0 + m1, m1).
double log_orbit_size(const GroupSizes& g);

/// Exact C(n, k) when it fits below 2^63.
std::optional<std::uint64_t> exact_binomial(int n, int k);

/// Table of log k! for k = 0..n.
class LogFactorials {
 public:
  explicit LogFactorials(int n);
  double log_factorial(int k) const { return table_.at(k); }
  /// log C(n, k); -inf when k < 0 or k > n.
  double log_choose(int n, int k) const;
  int size() const noexcept { return static_cast<int>(table_.size()) - 1; }

 private:
  std::vector<double> table_;
};

/// Valid ranges for the overlap counts and for r3 given (r1, r2).
IntRange delta1_range(int r1, int r2, const GroupSizes& g);
IntRange delta2_range(int r1, int r2, const GroupSizes& g);
IntRange r3_range(int r1, int r2, const GroupSizes& g);

/// The four kinds of ordered pairs (x_k, x_l) relative to xc.
enum class PairKind {
  all_equal,       ///< x_k = x_l = xc
  one_at_center,   ///< exactly one of x_k, x_l equals xc
  repeated_point,  ///< x_k = x_l != xc
  distinct,        ///< x_k, x_l, xc pairwise distinct
};

struct PairClass {
  PairKind kind = PairKind::all_equal;
  SwapTriple triple;
  double log_count = 0.0;
};

/// Counting kernel for one design; the log-factorial table is built once.
class SwapCombinatorics {
 public:
  explicit SwapCombinatorics(const GroupSizes& g);

  const GroupSizes& groups() const noexcept { return g_; }
  double log_n() const noexcept { return log_n_; }

  /// log[C(m0, r) C(m1, r)]: number of orbit points at swap distance r.
  double count_at_distance(int r) const;
  /// log c(r, delta): ordered pairs with swap distances r1, r2 from xc and
  /// overlaps delta1 (among the m0 block) and delta2 (among the m1 block).
  /// -inf outside D1 x D2.
  double pair_config_count(int r1, int r2, int delta1, int delta2) const;
  /// log c(r1, r2, r3): sum of pair_config_count over overlaps with
  /// r3 = r1 + r2 - delta1 - delta2.
  double triple_config_count(const SwapTriple& s) const;

  /// Every ordered pair class with nonzero count; the counts sum to N^2.
  std::vector<PairClass> census() const;

 private:
  GroupSizes g_;
  LogFactorials lf_;
  double log_n_;
};

double count_at_distance(int r, const GroupSizes& g);
double pair_config_count(int r1, int r2, int delta1, int delta2,
                         const GroupSizes& g);
double triple_config_count(const SwapTriple& s, const GroupSizes& g);

/// Number of positions where a is 1 and b is 0. Throws DomainError if the
/// vectors differ in length or in their number of ones.
int swap_distance(std::span<const std::uint8_t> a,
                  std::span<const std::uint8_t> b);

}  // namespace permcap
