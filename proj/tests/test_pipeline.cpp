#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "permcap/errors.hpp"
#include "permcap/estimators.hpp"
#include "permcap/ingest.hpp"
#include "permcap/pipeline.hpp"
#include "permcap/rng.hpp"
#include "permcap/validation.hpp"
#include "test_support.hpp"

using namespace permcap;
using permcap::testing::block_labels;

namespace {

ExpressionMatrix three_gene_matrix() {
  ExpressionMatrix m;
  m.genes = {"g1", "g2", "g3"};
  m.samples = {"s1", "s2", "s3", "s4"};
  m.values = {1, 2, 3, 4,  //
              2, 2, 4, 4,  //
              0, 0, 0, 3};
  return m;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Random matrix with a planted shift in the first `signal` genes.
ExpressionMatrix synthetic_matrix(const std::vector<std::uint8_t>& labels, int genes,
                                  int signal, std::uint64_t seed) {
  ExpressionMatrix m;
  for (std::size_t i = 0; i < labels.size(); ++i) m.samples.push_back("s" + std::to_string(i));
  Rng rng(seed, 0);
  for (int g = 0; g < genes; ++g) {
    m.genes.push_back("G" + std::to_string(g));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      m.values.push_back(rng.normal() + (g < signal ? 0.8 * labels[i] : 0.0));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("gene standard deviations divide by n") {
  const auto sd = gene_standard_deviations(three_gene_matrix());
  CHECK(sd[0] == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  CHECK(sd[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sd[2] == doctest::Approx(std::sqrt(1.6875)).epsilon(1e-15));
}

TEST_CASE("composite response: hand-computed three-gene fixture") {
  const auto m = three_gene_matrix();
  const auto sd = gene_standard_deviations(m);
  const auto r = composite_response(m, sd, GeneSet{"S", "", {"g1", "g2", "g3"}});
  REQUIRE(r.values.size() == 4);
  CHECK(r.genes_used == 3);
  const double expected[] = {2.894427190999916, 3.788854381999832, 6.683281572999748,
                             9.887109840758166};
  for (int i = 0; i < 4; ++i) CHECK(r.values[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("composite response: single gene and duplicated rows") {
  auto m = three_gene_matrix();
  const auto sd = gene_standard_deviations(m);
  const auto single = composite_response(m, sd, GeneSet{"S", "", {"g3"}});
  for (int i = 0; i < 4; ++i) {
    CHECK(single.values[i] == doctest::Approx(m.row(2)[i] / std::sqrt(1.6875)).epsilon(1e-15));
  }
  m.genes.push_back("g3copy");
  for (double v : {0.0, 0.0, 0.0, 3.0}) m.values.push_back(v);
  const auto sd2 = gene_standard_deviations(m);
  const auto twice = composite_response(m, sd2, GeneSet{"S", "", {"g3", "g3copy"}});
  for (int i = 0; i < 4; ++i) CHECK(twice.values[i] == 2.0 * single.values[i]);
}

TEST_CASE("composite response: absent and zero-variance genes") {
  auto m = three_gene_matrix();
  m.genes.push_back("flat");
  for (int i = 0; i < 4; ++i) m.values.push_back(7.0);
  const auto sd = gene_standard_deviations(m);
  const auto r = composite_response(m, sd, GeneSet{"S", "", {"g1", "flat", "nope"}});
  CHECK(r.genes_used == 1);
  CHECK(r.zero_variance == std::vector<std::string>{"flat"});
  CHECK(r.absent == std::vector<std::string>{"nope"});
  CHECK_THROWS_AS(composite_response(m, sd, GeneSet{"S", "", {"nope"}}), InputError);
  CHECK_THROWS_AS(composite_response(m, sd, GeneSet{"S", "", {"flat"}}), DegenerateInput);
}

TEST_CASE("standardize: correlation, labels as response, label flip") {
  const auto labels = block_labels(4, 6);
  std::vector<double> as_real(labels.begin(), labels.end());
  CHECK(standardize(as_real, labels).rho_hat == doctest::Approx(1.0).epsilon(1e-15));

  const auto y = synthetic_response(labels, 0.7, 11);
  const auto sp = standardize(y, labels);
  CHECK(sp.rho_hat == doctest::Approx(correlation(as_real, y)).epsilon(1e-13));
  CHECK(sp.d == 8);

  std::vector<std::uint8_t> flipped(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) flipped[i] = 1 - labels[i];
  const auto sf = standardize(y, flipped);
  CHECK(sf.rho_hat == doctest::Approx(-sp.rho_hat).epsilon(1e-13));
  for (Estimator e : {Estimator::p1, Estimator::p2, Estimator::p3}) {
    const auto a = report(sp, e, Sided::two);
    const auto b = report(sf, e, Sided::two);
    CHECK(a.estimate == doctest::Approx(b.estimate).epsilon(1e-10));
    CHECK(a.rmse == doctest::Approx(b.rmse).epsilon(1e-8));
  }

  CHECK_THROWS_AS(standardize(std::vector<double>(10, 1.0), labels), DegenerateInput);
}

TEST_CASE("standard deviation convention leaves rho_hat unchanged") {
  const auto labels = block_labels(5, 5);
  const auto m = synthetic_matrix(labels, 4, 2, 3);
  const auto sd = gene_standard_deviations(m);
  const double n = static_cast<double>(labels.size());
  std::vector<double> sample_sd(sd.size());
  for (std::size_t g = 0; g < sd.size(); ++g) sample_sd[g] = sd[g] * std::sqrt(n / (n - 1));
  const GeneSet set{"S", "", {"G0", "G1", "G2", "G3"}};
  const auto a = standardize(composite_response(m, sd, set).values, labels);
  const auto b = standardize(composite_response(m, sample_sd, set).values, labels);
  CHECK(a.rho_hat == doctest::Approx(b.rho_hat).epsilon(1e-14));
}

TEST_CASE("run_estimates: record invariants, input order and error records") {
  const auto labels = block_labels(6, 8);
  const auto m = synthetic_matrix(labels, 30, 10, 5);
  GeneSetCollection sets;
  sets.sets.push_back({"signal", "", {"G0", "G1", "G2", "G3", "G4", "G5"}});
  sets.sets.push_back({"noise", "", {"G20", "G21", "G22", "missing"}});
  sets.sets.push_back({"empty", "", {"nothing"}});
  sets.sets.push_back({"mixed", "", {"G9", "G10"}});
  for (Sided sided : {Sided::one, Sided::two}) {
    PipelineOptions opt;
    opt.sided = sided;
    opt.with_rmse = true;
    const auto results = run_estimates(m, labels, sets, opt);
    REQUIRE(results.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(results[i].name == sets.sets[i].name);
    CHECK(results[2].error.has_value());
    CHECK(results[2].outcomes.empty());
    CHECK(results[1].warnings.size() == 1);
    for (const auto& r : results) {
      if (r.error) continue;
      CHECK(r.granularity == doctest::Approx(1.0 / 3003.0).epsilon(1e-15));
      REQUIRE(r.outcomes.size() == 3);
      for (const auto& o : r.outcomes) {
        CHECK(o.report.variance >= 0.0);
        CHECK(o.report.estimate <= (sided == Sided::one ? 1.0 : 2.0));
        if (sided == Sided::one && o.estimator != Estimator::p1) {
          CHECK(o.report.estimate >= r.granularity);
        }
        REQUIRE(o.chebychev.has_value());
        CHECK(o.chebychev->p_star >= o.report.estimate);
      }
      const Record rec = to_record(r, opt);
      CHECK(rec.front().key == "name");
      CHECK(rec.back().key == "error");
    }
    CHECK(to_record(results[0], opt).size() == to_record(results[2], opt).size());
  }
}

TEST_CASE("run_estimates: identical values across thread counts") {
  const auto labels = block_labels(7, 9);
  const auto m = synthetic_matrix(labels, 40, 12, 9);
  GeneSetCollection sets;
  for (int s = 0; s < 8; ++s) {
    GeneSet set{"S" + std::to_string(s), "", {}};
    for (int g = s * 4; g < s * 4 + 6 && g < 40; ++g) set.genes.push_back("G" + std::to_string(g));
    sets.sets.push_back(set);
  }
  PipelineOptions opt;
  opt.with_rmse = true;
  opt.threads = 1;
  const auto serial = run_estimates(m, labels, sets, opt);
  opt.threads = 4;
  const auto parallel = run_estimates(m, labels, sets, opt);
  for (std::size_t i = 0; i < sets.sets.size(); ++i) {
    CHECK(to_record(serial[i], opt) == to_record(parallel[i], opt));
  }
}

TEST_CASE("run_estimates: p1 alone carries the reference-2 RMSE") {
  const auto labels = block_labels(4, 4);
  const auto m = synthetic_matrix(labels, 6, 3, 1);
  GeneSetCollection sets;
  sets.sets.push_back({"S", "", {"G0", "G1", "G2"}});
  PipelineOptions opt;
  opt.estimators = {Estimator::p1};
  opt.with_rmse = true;
  const auto r = run_estimates(m, labels, sets, opt);
  REQUIRE(r[0].outcomes.size() == 1);
  REQUIRE(r[0].outcomes[0].report.rmse_ref2.has_value());
  const Record rec = to_record(r[0], opt);
  bool found = false;
  for (const Field& f : rec) found |= f.key == "p1_rmse_ref2";
  CHECK(found);

  const auto sp = standardize(composite_response(m, gene_standard_deviations(m), sets.sets[0]).values,
                              labels);
  const auto cp = choose_conditioning_point(sp, Estimator::p2, Sided::two);
  const double mean = tilde_p_c(sp.g, sp.d, cp.rho_tilde, sp.rho_hat, Sided::two);
  const double second = second_moment_ref2(sp.g, sp.d, cp.rho_tilde, sp.rho_hat, Sided::two);
  const double p1 = p_hat1_estimate(sp.d, sp.rho_hat, Sided::two);
  CHECK(*r[0].outcomes[0].report.rmse_ref2 ==
        doctest::Approx(std::sqrt(mse_under_ref2(p1, mean, second))).epsilon(1e-12));
}
