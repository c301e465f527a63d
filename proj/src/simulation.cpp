#include "permcap/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "permcap/errors.hpp"
#include "permcap/permutation_oracle.hpp"
#include "permcap/rng.hpp"

namespace permcap {

namespace {

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

bool separated(const std::vector<double>& y, const std::vector<std::uint8_t>& labels) {
  const double inf = std::numeric_limits<double>::infinity();
  double min0 = inf, max0 = -inf, min1 = inf, max1 = -inf;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (labels[i]) {
      min1 = std::min(min1, y[i]);
      max1 = std::max(max1, y[i]);
    } else {
      min0 = std::min(min0, y[i]);
      max0 = std::max(max0, y[i]);
    }
  }
  return min1 > max0 || min0 > max1;
}

EstimatorSummary summarize(const std::string& name, const std::vector<Replicate>& reps,
                           double Replicate::*estimate, const double Replicate::*z) {
  EstimatorSummary s;
  s.estimator = name;
  std::vector<double> ratios, errors;
  int below = 0;
  double max_z = -std::numeric_limits<double>::infinity();
  double max_z_small = max_z;
  bool any_small = false;
  for (const Replicate& r : reps) {
    if (r.separated) continue;
    const double ratio = r.*estimate / r.p_exact;
    ratios.push_back(ratio);
    errors.push_back(std::fabs(ratio - 1.0));
    below += r.*estimate < r.p_exact;
    if (z) {
      max_z = std::max(max_z, r.*z);
      if (r.*estimate < 0.1) {
        any_small = true;
        max_z_small = std::max(max_z_small, r.*z);
      }
    }
  }
  s.median_ratio = quantile(ratios, 0.5);
  s.q10_ratio = quantile(ratios, 0.1);
  s.q90_ratio = quantile(ratios, 0.9);
  s.median_abs_rel_error = quantile(errors, 0.5);
  s.fraction_below = ratios.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : static_cast<double>(below) / ratios.size();
  if (z && !ratios.empty()) s.max_z = max_z;
  if (z && any_small) s.max_z_small = max_z_small;
  return s;
}

}  // namespace

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::exp: return "exp";
    case Distribution::t5: return "t5";
    case Distribution::normal: return "normal";
    case Distribution::uniform: return "uniform";
  }
  return "normal";
}

Distribution parse_distribution(std::string_view name) {
  for (Distribution d : {Distribution::exp, Distribution::t5, Distribution::normal,
                         Distribution::uniform}) {
    if (name == to_string(d)) return d;
  }
  throw InputError("unknown distribution '" + std::string(name) +
                   "' (expected exp, t5, normal or uniform)");
}

double draw(Distribution dist, Rng& rng) {
  switch (dist) {
    case Distribution::exp:
      return -std::log1p(-rng.uniform());
    case Distribution::t5: {
      const double z = rng.normal();
      double chi2 = 0.0;
      for (int k = 0; k < 5; ++k) {
        const double v = rng.normal();
        chi2 += v * v;
      }
      return z / std::sqrt(chi2 / 5.0);
    }
    case Distribution::normal:
      return rng.normal();
    case Distribution::uniform:
      return rng.uniform();
  }
  return 0.0;
}

double default_shift(Distribution dist) {
  switch (dist) {
    case Distribution::exp:
    case Distribution::normal:
      return 2.0;
    case Distribution::t5:
      return 2.0 * std::sqrt(5.0 / 3.0);
    case Distribution::uniform:
      return 1.0 / std::sqrt(3.0);
  }
  return 2.0;
}

SimulationResult run_simulation(const SimulationConfig& cfg) {
  if (cfg.m0 < 1 || cfg.m1 < 1) throw DomainError("group sizes must be positive");
  if (cfg.reps < 1) throw DomainError("reps must be positive");
  const double shift = cfg.shift.value_or(default_shift(cfg.dist));
  if (!std::isfinite(shift)) throw DomainError("shift must be finite");
  const GroupSizes g(cfg.m0, cfg.m1);
  const OrbitTable orbit(g, cfg.max_exact_orbit);

  std::vector<std::uint8_t> labels(g.n(), 0);
  std::fill(labels.begin() + cfg.m0, labels.end(), 1);

  SimulationResult out;
  out.shift = shift;
  out.replicates.resize(cfg.reps);
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
  ReportOptions with;
  with.moments = cfg.moments;
  ReportOptions without;
  without.with_moments = false;

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int r = 0; r < cfg.reps; ++r) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(r));
    std::vector<double> y(g.n());
    for (int i = 0; i < g.n(); ++i) y[i] = draw(cfg.dist, rng) + (labels[i] ? shift : 0.0);
    Replicate rep;
    rep.index = r;
    rep.separated = separated(y, labels);
    const StandardizedPair sp = StandardizedPair::from_raw(labels, y);
    rep.rho_hat = sp.rho_hat;
    rep.p_exact = orbit.p_value(sp.y0, sp.rho_hat, cfg.sided);
    rep.p1 = report(sp, Estimator::p1, cfg.sided, without).estimate;
    const MomentReport r2 = report(sp, Estimator::p2, cfg.sided, with);
    const MomentReport r3 = report(sp, Estimator::p3, cfg.sided, with);
    rep.p2 = r2.estimate;
    rep.p3 = r3.estimate;
    rep.rmse2 = r2.rmse;
    rep.rmse3 = r3.rmse;
    rep.z2 = z_score(rep.p_exact, rep.p2, rep.rmse2);
    rep.z3 = z_score(rep.p_exact, rep.p3, rep.rmse3);
    out.replicates[r] = rep;
  }

  SimulationSummary& s = out.summary;
  s.reps = cfg.reps;
  for (const Replicate& r : out.replicates) s.excluded += r.separated;
  s.used = s.reps - s.excluded;
  s.estimators.push_back(summarize("p1", out.replicates, &Replicate::p1, nullptr));
  s.estimators.push_back(summarize("p2", out.replicates, &Replicate::p2, &Replicate::z2));
  s.estimators.push_back(summarize("p3", out.replicates, &Replicate::p3, &Replicate::z3));
  return out;
}

Record to_record(const Replicate& r) {
  return {{"replicate", static_cast<std::int64_t>(r.index)},
          {"separated", r.separated},
          {"rho_hat", number(r.rho_hat)},
          {"p", number(r.p_exact)},
          {"p1", number(r.p1)},
          {"p2", number(r.p2)},
          {"p3", number(r.p3)},
          {"rmse2", number(r.rmse2)},
          {"rmse3", number(r.rmse3)},
          {"z2", number(r.z2)},
          {"z3", number(r.z3)}};
}

std::vector<Record> to_records(const SimulationResult& r, const SimulationConfig& cfg) {
  const SimulationSummary& s = r.summary;
  std::vector<Record> out;
  for (const EstimatorSummary& e : s.estimators) {
    auto opt = [](const std::optional<double>& v) -> FieldValue {
      return v ? number(*v) : FieldValue{};
    };
    out.push_back({{"dist", std::string(to_string(cfg.dist))},
                   {"shift", number(r.shift)},
                   {"m0", static_cast<std::int64_t>(cfg.m0)},
                   {"m1", static_cast<std::int64_t>(cfg.m1)},
                   {"sided", std::string(to_string(cfg.sided))},
                   {"seed", static_cast<std::int64_t>(cfg.seed)},
                   {"reps", static_cast<std::int64_t>(s.reps)},
                   {"excluded", static_cast<std::int64_t>(s.excluded)},
                   {"estimator", e.estimator},
                   {"median_ratio", number(e.median_ratio)},
                   {"q10_ratio", number(e.q10_ratio)},
                   {"q90_ratio", number(e.q90_ratio)},
                   {"median_abs_rel_error", number(e.median_abs_rel_error)},
                   {"fraction_below", number(e.fraction_below)},
                   {"max_z", opt(e.max_z)},
                   {"max_z_small", opt(e.max_z_small)}});
  }
  return out;
}

}  // namespace permcap
