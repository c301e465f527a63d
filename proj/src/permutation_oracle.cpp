#include "permcap/permutation_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "permcap/errors.hpp"
#include "permcap/rng.hpp"

namespace permcap {

namespace {

constexpr std::size_t kMcChunk = 4096;
constexpr std::size_t kSampleChunk = 1024;

// <x_k, y> = (pos - neg) * (sum of y over the cases of x_k) + neg * sum(y).
class Statistic {
 public:
  Statistic(std::span<const double> y, const GroupSizes& g, double t, Sided sided)
      : sided_(sided), t_(sided == Sided::one ? t : std::fabs(t)) {
    const double n = g.n();
    neg_ = -std::sqrt(g.m1 / (n * g.m0));
    slope_ = std::sqrt(g.m0 / (n * g.m1)) - neg_;
    double abs_sum = 0.0;
    for (double v : y) {
      total_ += v;
      abs_sum += std::fabs(v);
    }
    tol_ = 8.0 * n * std::numeric_limits<double>::epsilon() *
           (slope_ * abs_sum + std::fabs(neg_ * total_));
  }

  bool hit(double case_sum) const {
    const double stat = slope_ * case_sum + neg_ * total_;
    if (sided_ == Sided::one) return stat >= t_ - tol_;
    return std::fabs(stat) >= t_ - tol_;
  }

 private:
  Sided sided_;
  double t_;
  double neg_ = 0.0;
  double slope_ = 0.0;
  double total_ = 0.0;
  double tol_ = 0.0;
};

// Counts k-subsets of {lo, ..., n-1} whose y-sum plus `base` is a hit.
std::uint64_t count_hits(std::span<const double> y, int lo, int k, double base,
                         const Statistic& stat) {
  const int n = static_cast<int>(y.size());
  if (k == 0) return stat.hit(base) ? 1 : 0;
  std::vector<int> idx(k);
  std::vector<double> prefix(k + 1);
  prefix[0] = base;
  for (int j = 0; j < k; ++j) {
    idx[j] = lo + j;
    prefix[j + 1] = prefix[j] + y[idx[j]];
  }
  std::uint64_t hits = 0;
  while (true) {
    hits += stat.hit(prefix[k]);
    int j = k - 1;
    while (j >= 0 && idx[j] == n - k + j) --j;
    if (j < 0) break;
    ++idx[j];
    prefix[j + 1] = prefix[j] + y[idx[j]];
    for (int i = j + 1; i < k; ++i) {
      idx[i] = idx[i - 1] + 1;
      prefix[i + 1] = prefix[i] + y[idx[i]];
    }
  }
  return hits;
}

std::uint64_t checked_orbit(const GroupSizes& g, std::uint64_t cap) {
  const auto n = exact_binomial(g.n(), g.m1);
  if (!n || *n > cap) {
    throw OrbitTooLarge("orbit of C(" + std::to_string(g.n()) + ", " +
                        std::to_string(g.m1) + ") allocations exceeds the limit of " +
                        std::to_string(cap));
  }
  return *n;
}

void check_length(std::span<const double> y, const GroupSizes& g) {
  if (static_cast<int>(y.size()) != g.n()) {
    throw DomainError("response length differs from m0 + m1");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void OracleConfig::validate() const {
  if (max_exact_orbit < 1) throw DomainError("max_exact_orbit must be >= 1");
  if (mc_draws < 1) throw DomainError("mc_draws must be >= 1");
}

double exact_p(std::span<const double> y, const GroupSizes& g, double t,
               Sided sided, const OracleConfig& cfg) {
  cfg.validate();
  check_length(y, g);
  const std::uint64_t total = checked_orbit(g, cfg.max_exact_orbit);
  const Statistic stat(y, g, t, sided);
  const int k = g.m1;
  const int last_first = g.n() - k;
  std::uint64_t hits = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
  for (int first = 0; first <= last_first; ++first) {
    hits += count_hits(y, first + 1, k - 1, y[first], stat);
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

double exact_p(const StandardizedPair& sp, Sided sided, const OracleConfig& cfg) {
  return exact_p(sp.y0, sp.g, sp.rho_hat, sided, cfg);
}

McResult mc_p(const StandardizedPair& sp, Sided sided, const OracleConfig& cfg) {
  cfg.validate();
  const Statistic stat(sp.y0, sp.g, sp.rho_hat, sided);
  const std::uint64_t random_draws = cfg.mc_draws - 1;
  const std::uint64_t chunks = (random_draws + kMcChunk - 1) / kMcChunk;
  const int n = sp.g.n();
  const int k = sp.g.m1;
  std::uint64_t hits = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
  for (std::uint64_t c = 0; c < chunks; ++c) {
    Rng rng(cfg.seed, c);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    const std::uint64_t end = std::min(random_draws, (c + 1) * kMcChunk);
    for (std::uint64_t draw = c * kMcChunk; draw < end; ++draw) {
      double sum = 0.0;
      for (int j = 0; j < k; ++j) {
        const int pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - j)));
        std::swap(perm[j], perm[pick]);
        sum += sp.y0[perm[j]];
      }
      hits += stat.hit(sum);
    }
  }
  McResult out;
  out.draws = cfg.mc_draws;
  const double m = static_cast<double>(cfg.mc_draws);
  out.estimate = static_cast<double>(hits + 1) / m;
  out.se = std::sqrt(out.estimate * (1.0 - out.estimate) / m);
  return out;
}

PointBatch sample_uniform_sphere(int d, std::size_t count, std::uint64_t seed) {
  if (d < 1) throw DomainError("sample_uniform_sphere needs d >= 1");
  PointBatch batch;
  batch.dim = static_cast<std::size_t>(d) + 1;
  batch.count = count;
  batch.data.resize(batch.dim * count);
  const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    Rng rng(seed, c);
    const std::size_t end = std::min(count, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) {
      double* row = batch.data.data() + i * batch.dim;
      double norm2 = 0.0;
      do {
        norm2 = 0.0;
        for (std::size_t j = 0; j < batch.dim; ++j) {
          row[j] = rng.normal();
          norm2 += row[j] * row[j];
        }
      } while (norm2 == 0.0);
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t j = 0; j < batch.dim; ++j) row[j] *= inv;
    }
  }
  return batch;
}

PointBatch sample_subsphere(std::span<const double> xc, double rho_tilde,
                            std::size_t count, std::uint64_t seed, bool sum_zero) {
  const std::size_t n = xc.size();
  if (n < 2) throw DomainError("sample_subsphere needs at least two coordinates");
  if (std::fabs(dot(xc, xc) - 1.0) > 1e-10) throw DomainError("xc must be a unit vector");
  if (sum_zero && std::fabs(std::accumulate(xc.begin(), xc.end(), 0.0)) > 1e-10) {
    throw DomainError("xc must be orthogonal to the all-ones vector");
  }
  if (std::isnan(rho_tilde) || std::fabs(rho_tilde) > 1.0 + 1e-12) {
    throw DomainError("rho_tilde outside [-1, 1]");
  }
  rho_tilde = std::clamp(rho_tilde, -1.0, 1.0);
  PointBatch batch;
  batch.dim = n;
  batch.count = count;
  batch.data.resize(n * count);
  const double radial = std::sqrt((1.0 - rho_tilde) * (1.0 + rho_tilde));
  const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    Rng rng(seed, c);
    std::vector<double> z(n);
    const std::size_t end = std::min(count, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) {
      double* row = batch.data.data() + i * n;
      double norm2 = 0.0;
      do {
        for (double& v : z) v = rng.normal();
        // Two projection passes keep the constraint residuals near rounding.
        for (int pass = 0; pass < 2; ++pass) {
          if (sum_zero) {
            const double mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
            for (double& v : z) v -= mean;
          }
          const double along = dot(z, xc);
          for (std::size_t j = 0; j < n; ++j) z[j] -= along * xc[j];
        }
        norm2 = dot(z, z);
      } while (!(norm2 > 1e-20));
      const double inv = radial / std::sqrt(norm2);
      for (std::size_t j = 0; j < n; ++j) row[j] = rho_tilde * xc[j] + inv * z[j];
    }
  }
  return batch;
}

OrbitTable::OrbitTable(const GroupSizes& g, std::uint64_t max_orbit) : g_(g) {
  count_ = checked_orbit(g, max_orbit);
  const int k = g.m1;
  const int n = g.n();
  members_.reserve(count_ * k);
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    members_.insert(members_.end(), idx.begin(), idx.end());
    int j = k - 1;
    while (j >= 0 && idx[j] == n - k + j) --j;
    if (j < 0) break;
    ++idx[j];
    for (int i = j + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
}

double OrbitTable::p_value(std::span<const double> y, double t, Sided sided) const {
  check_length(y, g_);
  const Statistic stat(y, g_, t, sided);
  std::uint64_t hits = 0;
  const int k = g_.m1;
  for (std::size_t a = 0; a < count_; ++a) {
    const int* m = members_.data() + a * k;
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += y[m[j]];
    hits += stat.hit(s);
  }
  return static_cast<double>(hits) / static_cast<double>(count_);
}

namespace reference {

double exact_p(std::span<const double> y, const GroupSizes& g, double t,
               Sided sided, const OracleConfig& cfg) {
  cfg.validate();
  check_length(y, g);
  const std::uint64_t total = checked_orbit(g, cfg.max_exact_orbit);
  const Statistic stat(y, g, t, sided);
  return static_cast<double>(count_hits(y, 0, g.m1, 0.0, stat)) /
         static_cast<double>(total);
}

}  // namespace reference

}  // namespace permcap
