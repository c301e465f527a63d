// Serial reference kernels against their OpenMP counterparts.
// Thread count for the parallel kernels comes from OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <vector>

#include "permcap/estimators.hpp"
#include "permcap/permutation_oracle.hpp"
#include "permcap/rng.hpp"
#include "permcap/validation.hpp"

using namespace permcap;

namespace {

std::vector<std::uint8_t> block_labels(int m0, int m1) {
  std::vector<std::uint8_t> l(m0 + m1, 0);
  for (int i = m0; i < m0 + m1; ++i) l[i] = 1;
  return l;
}

// A shifted-normal response with rho_hat near 0.3 for the given design.
StandardizedPair fixture(int m0, int m1) {
  const auto labels = block_labels(m0, m1);
  return StandardizedPair::from_raw(labels, synthetic_response(labels, 0.8, 5));
}

void second_moment(benchmark::State& state, bool serial) {
  const int m = static_cast<int>(state.range(0));
  const auto sp = fixture(m, m);
  for (auto _ : state) {
    const double v = serial
                         ? reference::second_moment_ref2(sp.g, sp.d, sp.rho_hat, sp.rho_hat, Sided::two)
                         : second_moment_ref2(sp.g, sp.d, sp.rho_hat, sp.rho_hat, Sided::two);
    benchmark::DoNotOptimize(v);
  }
}

void variance_ref1(benchmark::State& state, bool serial) {
  const GroupSizes g(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const double v = serial ? reference::var_ref1(g, 0.3, Sided::two) : var_ref1(g, 0.3, Sided::two);
    benchmark::DoNotOptimize(v);
  }
}

void exact_permutation_p(benchmark::State& state, bool serial) {
  const int m = static_cast<int>(state.range(0));
  const auto sp = fixture(m, m);
  const OracleConfig cfg{.max_exact_orbit = 1'000'000'000};
  for (auto _ : state) {
    const double v = serial ? reference::exact_p(sp.y0, sp.g, sp.rho_hat, Sided::two, cfg)
                            : exact_p(sp.y0, sp.g, sp.rho_hat, Sided::two, cfg);
    benchmark::DoNotOptimize(v);
  }
}

}  // namespace

BENCHMARK_CAPTURE(second_moment, serial, true)->Arg(8)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(second_moment, openmp, false)->Arg(8)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(variance_ref1, serial, true)->Arg(20)->Arg(70)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(variance_ref1, openmp, false)->Arg(20)->Arg(70)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(exact_permutation_p, serial, true)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(exact_permutation_p, openmp, false)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
