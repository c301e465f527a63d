#include "permcap/swap_combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "permcap/errors.hpp"
#include "permcap/special_functions.hpp"

namespace permcap {

__extension__ typedef unsigned __int128 U128;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_distance(int r, const GroupSizes& g) {
  if (r < 0 || r > g.m_min()) {
    throw DomainError("swap distance " + std::to_string(r) +
                      " outside [0, " + std::to_string(g.m_min()) + "]");
  }
}

bool in_range(int v, IntRange range) { return v >= range.lo && v <= range.hi; }

// log(sum exp(terms)) with compensated summation scaled by the largest term.
double log_sum_exp(const std::vector<double>& terms) {
  double top = kNegInf;
  for (double t : terms) top = std::max(top, t);
  if (top == kNegInf) return kNegInf;
  CompensatedSum sum;
  for (double t : terms) sum.add(std::exp(t - top));
  return top + std::log(sum.value());
}

}  // namespace

GroupSizes::GroupSizes(int controls, int cases) : m0(controls), m1(cases) {
  if (m0 < 1 || m1 < 1) throw DomainError("both groups need at least one sample");
  if (m0 + m1 < 4) throw DomainError("need at least four samples in total");
}

GroupSizes GroupSizes::for_counting(int controls, int cases) {
  if (controls < 1 || cases < 1) {
    throw DomainError("both groups need at least one sample");
  }
  GroupSizes g;
  g.m0 = controls;
  g.m1 = cases;
  return g;
}

double inner_product_at_swap(int r, const GroupSizes& g) {
  check_distance(r, g);
  const long long prod = static_cast<long long>(g.m0) * g.m1;
  const long long num = prod - static_cast<long long>(r) * g.n();
  return static_cast<double>(num) / static_cast<double>(prod);
}

std::optional<std::uint64_t> exact_binomial(int n, int k) {
  if (k < 0 || k > n) return std::uint64_t{0};
  k = std::min(k, n - k);
  U128 c = 1;
  constexpr U128 kLimit = static_cast<U128>(1) << 63;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<U128>(n - k + i) / i;
    if (c >= kLimit) return std::nullopt;
  }
  return static_cast<std::uint64_t>(c);
}

OrbitSize orbit_size(const GroupSizes& g) {
  return {log_orbit_size(g), exact_binomial(g.n(), g.m1)};
}

double log_orbit_size(const GroupSizes& g) {
  return log_gamma(g.n() + 1.0) - log_gamma(g.m0 + 1.0) - log_gamma(g.m1 + 1.0);
}

LogFactorials::LogFactorials(int n) : table_(static_cast<std::size_t>(n) + 1) {
  for (int k = 0; k <= n; ++k) table_[k] = log_gamma(k + 1.0);
}

double LogFactorials::log_choose(int n, int k) const {
  if (k < 0 || k > n) return kNegInf;
  return table_.at(n) - table_[k] - table_[n - k];
}

IntRange delta1_range(int r1, int r2, const GroupSizes& g) {
  return {std::max(0, r1 + r2 - g.m0), std::min(r1, r2)};
}

IntRange delta2_range(int r1, int r2, const GroupSizes& g) {
  return {std::max(0, r1 + r2 - g.m1), std::min(r1, r2)};
}

IntRange r3_range(int r1, int r2, const GroupSizes& g) {
  const int lo = std::max(1, r1 + r2 - 2 * std::min(r1, r2));
  const int hi = std::min({r1 + r2, g.m_min(), g.n() - r1 - r2});
  return {lo, hi};
}

SwapCombinatorics::SwapCombinatorics(const GroupSizes& g)
    : g_(g), lf_(g.n()), log_n_(lf_.log_choose(g.n(), g.m1)) {}

double SwapCombinatorics::count_at_distance(int r) const {
  check_distance(r, g_);
  return lf_.log_choose(g_.m0, r) + lf_.log_choose(g_.m1, r);
}

double SwapCombinatorics::pair_config_count(int r1, int r2, int delta1,
                                            int delta2) const {
  if (r1 < 1 || r2 < 1 || r1 > g_.m_min() || r2 > g_.m_min()) return kNegInf;
  if (!in_range(delta1, delta1_range(r1, r2, g_)) ||
      !in_range(delta2, delta2_range(r1, r2, g_))) {
    return kNegInf;
  }
  const int m0 = g_.m0;
  const int m1 = g_.m1;
  return lf_.log_choose(m0, delta1) + lf_.log_choose(m1, delta2) +
         lf_.log_choose(m0 - delta1, r1 - delta1) +
         lf_.log_choose(m1 - delta2, r1 - delta2) +
         lf_.log_choose(m0 - r1, r2 - delta1) +
         lf_.log_choose(m1 - r1, r2 - delta2);
}

double SwapCombinatorics::triple_config_count(const SwapTriple& s) const {
  const IntRange d1 = delta1_range(s.r1, s.r2, g_);
  std::vector<double> terms;
  for (int delta1 = d1.lo; delta1 <= d1.hi; ++delta1) {
    const int delta2 = s.r1 + s.r2 - s.r3 - delta1;
    const double t = pair_config_count(s.r1, s.r2, delta1, delta2);
    if (t != kNegInf) terms.push_back(t);
  }
  return log_sum_exp(terms);
}

std::vector<PairClass> SwapCombinatorics::census() const {
  std::vector<PairClass> out;
  const int mm = g_.m_min();
  out.push_back({PairKind::all_equal, {0, 0, 0}, 0.0});
  for (int r = 1; r <= mm; ++r) {
    out.push_back({PairKind::one_at_center, {0, r, r},
                   std::log(2.0) + count_at_distance(r)});
  }
  for (int r = 1; r <= mm; ++r) {
    out.push_back({PairKind::repeated_point, {r, r, 0}, count_at_distance(r)});
  }
  for (int r1 = 1; r1 <= mm; ++r1) {
    for (int r2 = 1; r2 <= mm; ++r2) {
      const IntRange r3s = r3_range(r1, r2, g_);
      for (int r3 = r3s.lo; r3 <= r3s.hi; ++r3) {
        const SwapTriple s{r1, r2, r3};
        const double c = triple_config_count(s);
        if (c != kNegInf) out.push_back({PairKind::distinct, s, c});
      }
    }
  }
  return out;
}

double count_at_distance(int r, const GroupSizes& g) {
  return SwapCombinatorics(g).count_at_distance(r);
}

double pair_config_count(int r1, int r2, int delta1, int delta2,
                         const GroupSizes& g) {
  return SwapCombinatorics(g).pair_config_count(r1, r2, delta1, delta2);
}

double triple_config_count(const SwapTriple& s, const GroupSizes& g) {
  return SwapCombinatorics(g).triple_config_count(s);
}

int swap_distance(std::span<const std::uint8_t> a,
                  std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw DomainError("swap_distance: length mismatch");
  int ones_a = 0;
  int ones_b = 0;
  int r = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ones_a += a[i] != 0;
    ones_b += b[i] != 0;
    r += (a[i] != 0) && (b[i] == 0);
  }
  if (ones_a != ones_b) throw DomainError("swap_distance: different number of ones");
  return r;
}

}  // namespace permcap
