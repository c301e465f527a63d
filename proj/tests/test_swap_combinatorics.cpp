#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>

#include "permcap/errors.hpp"
#include "permcap/estimators.hpp"
#include "permcap/swap_combinatorics.hpp"
#include "test_support.hpp"

using namespace permcap;

namespace {

std::uint64_t binom(int n, int k) { return *exact_binomial(n, k); }

std::uint64_t rounded(double log_count) {
  return static_cast<std::uint64_t>(std::llround(std::exp(log_count)));
}

// All allocations of m1 cases among n = m0 + m1 positions, as bit masks.
std::vector<unsigned> allocations(int m0, int m1) {
  std::vector<unsigned> out;
  for (unsigned mask = 0; mask < (1u << (m0 + m1)); ++mask) {
    if (__builtin_popcount(mask) == m1) out.push_back(mask);
  }
  return out;
}

int distance(unsigned a, unsigned b) { return __builtin_popcount(a & ~b); }

// Census of ordered pairs (x_k, x_l) by (r1, r2, r3) relative to a fixed xc.
std::map<std::tuple<int, int, int>, std::uint64_t> brute_census(int m0, int m1) {
  const auto all = allocations(m0, m1);
  const unsigned xc = all.front();
  std::map<std::tuple<int, int, int>, std::uint64_t> census;
  for (unsigned a : all) {
    for (unsigned b : all) {
      ++census[{distance(a, xc), distance(b, xc), distance(a, b)}];
    }
  }
  return census;
}

}  // namespace

TEST_CASE("group sizes validation") {
  CHECK_THROWS_AS(GroupSizes(0, 5), DomainError);
  CHECK_THROWS_AS(GroupSizes(1, 2), DomainError);
  const GroupSizes g(11, 18);
  CHECK(g.n() == 29);
  CHECK(g.m_min() == 11);
  CHECK(g.dimension() == 27);
  CHECK(GroupSizes::for_counting(1, 1).n() == 2);
}

TEST_CASE("inner product at swap distance") {
  CHECK(inner_product_at_swap(0, GroupSizes(7, 9)) == 1.0);
  CHECK(inner_product_at_swap(1, GroupSizes(2, 2)) == 0.0);
  CHECK(inner_product_at_swap(2, GroupSizes(2, 2)) == -1.0);
  CHECK(inner_product_at_swap(3, GroupSizes(11, 18)) ==
        doctest::Approx(1.0 - 3.0 * (1.0 / 11 + 1.0 / 18)).epsilon(1e-15));
  CHECK(inner_product_at_swap(3, GroupSizes(11, 18)) == doctest::Approx(0.560606).epsilon(1e-6));
  CHECK_THROWS_AS(inner_product_at_swap(12, GroupSizes(11, 18)), DomainError);
  CHECK_THROWS_AS(inner_product_at_swap(-1, GroupSizes(11, 18)), DomainError);
}

TEST_CASE("inner product matches standardized label vectors") {
  const GroupSizes g(11, 18);
  const auto base = permcap::testing::block_labels(11, 18);
  const auto x0 = standardized_labels(base);
  for (int r = 0; r <= 11; ++r) {
    const auto moved = permcap::testing::swap_labels(base, r);
    CHECK(swap_distance(moved, base) == r);
    const auto x = standardized_labels(moved);
    CHECK(inner_product_at_swap(r, g) ==
          doctest::Approx(permcap::testing::dot(x, x0)).epsilon(1e-13));
  }
}

TEST_CASE("inner product strictly decreasing in r") {
  const GroupSizes g(6, 9);
  for (int r = 1; r <= 6; ++r) {
    CHECK(inner_product_at_swap(r, g) < inner_product_at_swap(r - 1, g));
    CHECK(inner_product_at_swap(r, g) >= -1.0);
  }
}

TEST_CASE("orbit sizes of the three study designs") {
  const auto a = orbit_size(GroupSizes(18, 11));
  REQUIRE(a.exact);
  CHECK(*a.exact == 34597290ULL);
  CHECK(std::exp(a.log_n) == doctest::Approx(3.5e7).epsilon(0.02));
  const auto b = orbit_size(GroupSizes(14, 29));
  REQUIRE(b.exact);
  CHECK(*b.exact == 78378960360ULL);
  CHECK(std::exp(b.log_n) == doctest::Approx(7.9e10).epsilon(0.01));
  const auto c = orbit_size(GroupSizes(22, 50));
  REQUIRE(c.exact);
  CHECK(std::exp(c.log_n) == doctest::Approx(1.8e18).epsilon(0.02));
  CHECK(std::exp(c.log_n) == doctest::Approx(static_cast<double>(*c.exact)).epsilon(1e-12));
  CHECK_FALSE(orbit_size(GroupSizes(40, 40)).exact);
}

TEST_CASE("count at distance") {
  CHECK(count_at_distance(0, GroupSizes(5, 5)) == 0.0);
  CHECK(rounded(count_at_distance(1, GroupSizes::for_counting(2, 3))) == 6);
  CHECK_THROWS_AS(count_at_distance(3, GroupSizes::for_counting(2, 3)), DomainError);
}

TEST_CASE("Vandermonde closure") {
  for (int m0 = 1; m0 <= 12; ++m0) {
    for (int m1 = 1; m1 <= 12; ++m1) {
      const auto g = GroupSizes::for_counting(m0, m1);
      std::uint64_t total = 0;
      for (int r = 0; r <= g.m_min(); ++r) {
        const std::uint64_t c = rounded(count_at_distance(r, g));
        CHECK(c == binom(m0, r) * binom(m1, r));
        total += c;
      }
      CHECK(total == binom(m0 + m1, m0));
    }
  }
}

TEST_CASE("pair configuration count examples") {
  CHECK(rounded(pair_config_count(1, 1, 1, 1, GroupSizes::for_counting(1, 1))) == 1);
  const auto g = GroupSizes::for_counting(5, 7);
  const SwapCombinatorics sc(g);
  std::uint64_t total = 0;
  for (int d1 = 0; d1 <= 3; ++d1) {
    for (int d2 = 0; d2 <= 3; ++d2) {
      const double lc = sc.pair_config_count(2, 3, d1, d2);
      if (std::isfinite(lc)) total += rounded(lc);
    }
  }
  CHECK(total == binom(5, 2) * binom(7, 2) * binom(5, 3) * binom(7, 3));
  CHECK(std::isinf(sc.pair_config_count(2, 3, 3, 0)));
  CHECK(std::isinf(sc.pair_config_count(2, 3, -1, 0)));
}

TEST_CASE("triple configuration counts marginalize over r3") {
  const auto g = GroupSizes::for_counting(4, 5);
  const SwapCombinatorics sc(g);
  for (int r1 = 1; r1 <= 4; ++r1) {
    for (int r2 = 1; r2 <= 4; ++r2) {
      std::uint64_t total = 0;
      const IntRange range = r3_range(r1, r2, g);
      CHECK(range.lo >= 1);
      for (int r3 = range.lo; r3 <= range.hi; ++r3) {
        const double lc = sc.triple_config_count({r1, r2, r3});
        if (std::isfinite(lc)) total += rounded(lc);
      }
      // Pairs with r3 = 0 (x1 = x2) are only possible when r1 = r2.
      const std::uint64_t repeated = r1 == r2 ? binom(4, r1) * binom(5, r1) : 0;
      CHECK(total + repeated == binom(4, r1) * binom(5, r1) * binom(4, r2) * binom(5, r2));
    }
  }
}

TEST_CASE("pair census partitions all ordered pairs exactly") {
  for (int m0 = 1; m0 <= 5; ++m0) {
    for (int m1 = 1; m1 <= 5; ++m1) {
      const auto brute = brute_census(m0, m1);
      const SwapCombinatorics sc(GroupSizes::for_counting(m0, m1));
      std::map<std::tuple<int, int, int>, std::uint64_t> formula;
      std::uint64_t total = 0;
      for (const PairClass& c : sc.census()) {
        const std::uint64_t count = rounded(c.log_count);
        total += count;
        if (c.kind == PairKind::one_at_center) {
          // Both orders (0, r, r) and (r, 0, r) carry half of the count.
          formula[{0, c.triple.r2, c.triple.r3}] += count / 2;
          formula[{c.triple.r2, 0, c.triple.r3}] += count / 2;
        } else {
          formula[{c.triple.r1, c.triple.r2, c.triple.r3}] += count;
        }
      }
      const std::uint64_t n = binom(m0 + m1, m1);
      CAPTURE(m0);
      CAPTURE(m1);
      CHECK(total == n * n);
      CHECK(formula == brute);
    }
  }
}

TEST_CASE("census for the smallest square design") {
  // m0 = m1 = 2: N = 6 and 36 ordered pairs.
  const auto brute = brute_census(2, 2);
  const SwapCombinatorics sc(GroupSizes(2, 2));
  CHECK(rounded(sc.triple_config_count({1, 1, 2})) == brute.at({1, 1, 2}));
  CHECK(std::isinf(sc.triple_config_count({2, 2, 1})));
}

TEST_CASE("overlap among controls binds to m0") {
  // delta1 counts controls of xc moved into the cases by both x1 and x2;
  // delta2 counts cases of xc moved out by both.
  for (auto [m0, m1] : {std::pair{2, 4}, {4, 2}, {3, 5}, {4, 4}}) {
    const auto all = allocations(m0, m1);
    const unsigned xc = all.front();
    const unsigned full = (1u << (m0 + m1)) - 1;
    std::map<std::tuple<int, int, int, int>, std::uint64_t> brute;
    for (unsigned a : all) {
      for (unsigned b : all) {
        const int r1 = distance(a, xc);
        const int r2 = distance(b, xc);
        if (r1 == 0 || r2 == 0 || a == b) continue;
        const int d1 = __builtin_popcount(a & b & ~xc & full);
        const int d2 = __builtin_popcount(~a & ~b & xc & full);
        CHECK(distance(a, b) == r1 + r2 - d1 - d2);
        ++brute[{r1, r2, d1, d2}];
      }
    }
    const auto g = GroupSizes::for_counting(m0, m1);
    const LogFactorials lf(m0 + m1);
    bool swapped_mismatch = false;
    for (const auto& [key, count] : brute) {
      const auto [r1, r2, d1, d2] = key;
      CAPTURE(m0);
      CAPTURE(r1);
      CAPTURE(r2);
      CAPTURE(d1);
      CAPTURE(d2);
      CHECK(rounded(pair_config_count(r1, r2, d1, d2, g)) == count);
      const double alt = lf.log_choose(m1, d1) + lf.log_choose(m0, d2) +
                         lf.log_choose(m1 - d1, r1 - d1) + lf.log_choose(m0 - d2, r1 - d2) +
                         lf.log_choose(m1 - r1, r2 - d1) + lf.log_choose(m0 - r1, r2 - d2);
      swapped_mismatch |= (std::isfinite(alt) ? rounded(alt) : 0) != count;
    }
    // Binding delta1 to m1 instead reproduces the census only for m0 = m1.
    CHECK(swapped_mismatch == (m0 != m1));
  }
}

TEST_CASE("log counts agree with exact integers where N^2 fits") {
  const GroupSizes g(9, 11);
  const SwapCombinatorics sc(g);
  const std::uint64_t n = binom(20, 9);
  unsigned __int128 total = 0;
  for (const PairClass& c : sc.census()) {
    const double v = std::exp(c.log_count);
    const auto r = static_cast<std::uint64_t>(std::llround(v));
    CHECK(std::fabs(v - static_cast<double>(r)) <= 1e-9 * v);
    total += r;
  }
  CHECK(static_cast<std::uint64_t>(total) == n * n);
}

TEST_CASE("swap distance") {
  const std::vector<std::uint8_t> a{1, 1, 0, 0, 0};
  const std::vector<std::uint8_t> b{0, 0, 0, 1, 1};
  CHECK(swap_distance(a, a) == 0);
  CHECK(swap_distance(a, b) == 2);
  const std::vector<std::uint8_t> c{1, 0, 0, 0, 0};
  CHECK_THROWS_AS(swap_distance(a, c), DomainError);
  const std::vector<std::uint8_t> d{1, 1, 0, 0};
  CHECK_THROWS_AS(swap_distance(a, d), DomainError);
}
