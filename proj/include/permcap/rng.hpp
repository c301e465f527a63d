#pragma once

// Reproducible random streams. Each (seed, stream) pair maps through
// SplitMix64 to the seed of an independent std::mt19937_64; normals use the
// Marsaglia polar method and bounded integers use Lemire's multiply-shift
// rejection, so draws do not depend on the standard library's distributions.

#include <cstdint>
#include <random>

namespace permcap {

/// One SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for stream `stream` of master seed `seed`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound);
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace permcap
