#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "permcap/errors.hpp"
#include "permcap/permutation_oracle.hpp"
#include "permcap/rng.hpp"
#include "permcap/simulation.hpp"
#include "permcap/sweep.hpp"
#include "permcap/validation.hpp"
#include "test_support.hpp"

using namespace permcap;
using permcap::testing::block_labels;
using permcap::testing::Moments;

TEST_CASE("default rho grid is increasing and ends at 0.99") {
  const auto grid = default_rho_grid();
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == doctest::Approx(0.99));
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(std::adjacent_find(grid.begin(), grid.end()) == grid.end());
}

TEST_CASE("sweep rows match the estimator functions") {
  SweepConfig cfg;
  cfg.m_values = {6};
  cfg.rho_grid = {0.0, 0.4, 0.8};
  cfg.sided = Sided::one;
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 3);
  const GroupSizes g(6, 6);
  for (const SweepRow& r : rows) {
    CHECK(r.granularity == 1.0 / 924.0);
    CHECK(r.p1 == p_hat1_estimate(10, r.rho, Sided::one));
    CHECK(r.log10_p1 == doctest::Approx(std::log10(r.p1)).epsilon(1e-12));
    const double mean = tilde_p_c(g, 10, r.rho, r.rho, Sided::one);
    CHECK(r.p2 == std::max(mean, r.granularity));
    const double second = second_moment_ref2(g, 10, r.rho, r.rho, Sided::one);
    CHECK(r.rmse2_p2 == doctest::Approx(std::sqrt(std::max(0.0, second - r.p2 * r.p2))).epsilon(1e-9));
    CHECK(r.cv_p2 == doctest::Approx(r.rmse2_p2 / r.p2).epsilon(1e-12));
    CHECK(r.rmse1_p1 == doctest::Approx(std::sqrt(std::max(0.0, var_ref1(g, r.rho, Sided::one)))).epsilon(1e-12));
  }
  CHECK(rows[0].p1 == 0.5);
  CHECK_THROWS_AS(run_sweep({{4}, {1.5}, Sided::one, {}}), DomainError);
}

TEST_CASE("small-m sweep row agrees with simulation under both references") {
  const GroupSizes g(3, 3);
  const OrbitTable orbit(g);
  const auto xc = standardized_labels(block_labels(3, 3));
  SweepConfig cfg;
  cfg.m_values = {3};
  cfg.rho_grid = {0.3};
  cfg.sided = Sided::one;
  const SweepRow row = run_sweep(cfg).front();

  const auto ref1 = simulate_reference1(orbit, 0.3, Sided::one, 100'000, 21);
  CHECK(std::fabs(row.rmse1_p1 * row.rmse1_p1 - ref1.variance) <= 4 * ref1.variance_se);

  const PointBatch ys = sample_subsphere(xc, 0.3, 100'000, 22);
  Moments p, p_sq, err1;
  for (std::size_t i = 0; i < ys.count; ++i) {
    const double v = orbit.p_value(ys.row(i), 0.3, Sided::one);
    p.add(v);
    p_sq.add(v * v);
    err1.add((v - row.p1) * (v - row.p1));
  }
  CHECK(std::fabs(row.p2 - p.mean()) <= 4 * p.se());
  const double second = row.rmse2_p2 * row.rmse2_p2 + row.p2 * row.p2;
  CHECK(std::fabs(second - p_sq.mean()) <= 4 * p_sq.se());
  CHECK(std::fabs(row.rmse2_p1 * row.rmse2_p1 - err1.mean()) <= 4 * err1.se());
}

TEST_CASE("sweep checks pass on a real curve and catch broken ones") {
  SweepConfig cfg;
  cfg.m_values = {8};
  cfg.sided = Sided::one;
  const auto rows = run_sweep(cfg);
  const auto checks = check_sweep(rows, Sided::one);
  CHECK(checks.size() == 6);
  for (const auto& c : checks) CHECK_MESSAGE(c.pass, c.name << ": " << c.detail);

  auto broken = rows;
  broken[10].cv_p2 = 7.0;
  broken.back().rmse2_p2 = 1e-3;
  broken[3].p1 = 0.9;
  int failures = 0;
  for (const auto& c : check_sweep(broken, Sided::one)) failures += !c.pass;
  CHECK(failures == 3);

  SweepCriteria strict;
  strict.cv_limit = 0.1;
  bool cv_failed = false;
  for (const auto& c : check_sweep(rows, Sided::one, strict)) {
    if (c.name.find("CV") != std::string::npos) cv_failed = !c.pass;
  }
  CHECK(cv_failed);
}

TEST_CASE("sweep record fields") {
  SweepRow r;
  r.m = 5;
  const Record rec = to_record(r);
  REQUIRE(rec.size() == 12);
  CHECK(rec[0].key == "m");
  CHECK(rec[1].key == "rho");
  CHECK(rec[10].key == "cv_p2");
}

TEST_CASE("simulation draws have the intended moments") {
  const struct {
    Distribution d;
    double mean;
    double var;
  } cases[] = {{Distribution::exp, 1.0, 1.0},
               {Distribution::t5, 0.0, 5.0 / 3.0},
               {Distribution::normal, 0.0, 1.0},
               {Distribution::uniform, 0.5, 1.0 / 12.0}};
  for (const auto& c : cases) {
    Rng rng(3, static_cast<std::uint64_t>(c.d));
    Moments m;
    for (int i = 0; i < 200'000; ++i) m.add(draw(c.d, rng));
    CHECK(std::fabs(m.mean() - c.mean) <= 4 * m.se());
    CHECK(m.variance() == doctest::Approx(c.var).epsilon(0.03));
    CHECK(default_shift(c.d) == doctest::Approx(2 * std::sqrt(c.var)).epsilon(1e-15));
  }
  CHECK(parse_distribution("t5") == Distribution::t5);
  CHECK_THROWS_AS(parse_distribution("cauchy"), InputError);
}

TEST_CASE("simulation replicates use exact p and count separated draws") {
  SimulationConfig cfg;
  cfg.m0 = 4;
  cfg.m1 = 5;
  cfg.reps = 40;
  cfg.shift = 1.5;
  cfg.seed = 17;
  const auto res = run_simulation(cfg);
  REQUIRE(res.replicates.size() == 40);
  CHECK(res.shift == 1.5);
  const GroupSizes g(4, 5);
  const auto labels = block_labels(4, 5);
  int separated = 0;
  for (const Replicate& r : res.replicates) {
    Rng rng(17, static_cast<std::uint64_t>(r.index));
    std::vector<double> y(9);
    for (int i = 0; i < 9; ++i) y[i] = draw(Distribution::normal, rng) + 1.5 * labels[i];
    const auto sp = StandardizedPair::from_raw(labels, y);
    CHECK(r.rho_hat == sp.rho_hat);
    CHECK(r.p_exact == reference::exact_p(sp.y0, g, sp.rho_hat, Sided::two));
    const double lo1 = *std::min_element(y.begin() + 4, y.end());
    const double hi0 = *std::max_element(y.begin(), y.begin() + 4);
    const double lo0 = *std::min_element(y.begin(), y.begin() + 4);
    const double hi1 = *std::max_element(y.begin() + 4, y.end());
    CHECK(r.separated == (lo1 > hi0 || lo0 > hi1));
    separated += r.separated;
    CHECK(r.p2 >= 1.0 / 126.0);
    CHECK(r.z2 == doctest::Approx(z_score(r.p_exact, r.p2, r.rmse2)));
  }
  CHECK(res.summary.excluded == separated);
  CHECK(res.summary.used == 40 - separated);
  REQUIRE(res.summary.estimators.size() == 3);
  CHECK_FALSE(res.summary.estimators[0].max_z.has_value());
  CHECK(res.summary.estimators[1].max_z.has_value());
  CHECK(to_records(res, cfg).size() == 3);
}

TEST_CASE("simulation results do not depend on the thread count") {
  SimulationConfig cfg;
  cfg.reps = 12;
  cfg.m0 = 6;
  cfg.m1 = 7;
  cfg.dist = Distribution::t5;
  cfg.threads = 1;
  const auto a = run_simulation(cfg);
  cfg.threads = 3;
  const auto b = run_simulation(cfg);
  for (int r = 0; r < 12; ++r) CHECK(to_record(a.replicates[r]) == to_record(b.replicates[r]));
  CHECK(to_records(a, cfg) == to_records(b, cfg));
}

TEST_CASE("simulation: large shift separates every replicate") {
  SimulationConfig cfg;
  cfg.dist = Distribution::uniform;
  cfg.shift = 2.0;
  cfg.m0 = 3;
  cfg.m1 = 3;
  cfg.reps = 5;
  const auto res = run_simulation(cfg);
  CHECK(res.summary.excluded == 5);
  for (const Replicate& r : res.replicates) CHECK(r.p_exact == doctest::Approx(2.0 / 20.0));
  CHECK(std::isnan(res.summary.estimators[1].median_ratio));
  CHECK_FALSE(res.summary.estimators[1].max_z.has_value());
}
