#pragma once

// Two-sample shift simulations comparing p1, p2, p3 with the exact
// permutation p-value.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "permcap/estimators.hpp"
#include "permcap/report_io.hpp"

namespace permcap {

class Rng;

enum class Distribution { exp, t5, normal, uniform };

std::string_view to_string(Distribution d);
/// Accepts exp, t5, normal and uniform; throws InputError otherwise.
Distribution parse_distribution(std::string_view name);

/// One draw: Exp(1), Student t with 5 degrees of freedom, N(0, 1) or U(0, 1).
double draw(Distribution dist, Rng& rng);

/// Two standard deviations of the distribution: 2 for Exp(1) and N(0, 1),
/// 2 sqrt(5/3) for t5 and 1/sqrt(3) for U(0, 1).
double default_shift(Distribution dist);

struct SimulationConfig {
  Distribution dist = Distribution::normal;
  std::optional<double> shift;  ///< added to every case observation; default_shift when unset
  int m0 = 10;
  int m1 = 10;
  int reps = 500;
  std::uint64_t seed = 1;
  Sided sided = Sided::two;
  std::uint64_t max_exact_orbit = 2'000'000;
  MomentOptions moments;
  int threads = 0;  ///< 0 uses the OpenMP default
};

struct Replicate {
  int index = 0;
  bool separated = false;  ///< one group lies entirely above the other
  double rho_hat = 0.0;
  double p_exact = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double rmse2 = 0.0;
  double rmse3 = 0.0;
  double z2 = 0.0;
  double z3 = 0.0;
};

struct EstimatorSummary {
  std::string estimator;
  double median_ratio = 0.0;            ///< median of estimate / p
  double q10_ratio = 0.0;
  double q90_ratio = 0.0;
  double median_abs_rel_error = 0.0;    ///< median of |estimate / p - 1|
  double fraction_below = 0.0;          ///< share of replicates with estimate < p
  std::optional<double> max_z;          ///< p2, p3 only
  std::optional<double> max_z_small;    ///< max Z among estimates below 0.1
};

struct SimulationSummary {
  int reps = 0;
  int excluded = 0;  ///< perfectly separated replicates
  int used = 0;
  std::vector<EstimatorSummary> estimators;
};

struct SimulationResult {
  std::vector<Replicate> replicates;
  SimulationSummary summary;
  double shift = 0.0;  ///< shift actually applied
};

/// Replicate r draws from stream r of cfg.seed, so results do not depend on
/// the thread count.
SimulationResult run_simulation(const SimulationConfig& cfg);

Record to_record(const Replicate& r);
std::vector<Record> to_records(const SimulationResult& r, const SimulationConfig& cfg);

}  // namespace permcap
