#include "permcap/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "permcap/errors.hpp"
#include "permcap/inclusion_probability.hpp"
#include "permcap/rng.hpp"
#include "permcap/sphere_geometry.hpp"

namespace permcap {

namespace {

// Quadrature settings treated as exact when judging the configured ones.
const QuadratureConfig kReferenceQuadrature{1e-13, 1e-16, 5000};

// Agreement with the reference required of the configured quadrature,
// relative to the reference value. Monte Carlo error is far too large to
// expose integration error, so this check does not scale with it.
constexpr double kQuadratureRelAccuracy = 1e-9;
constexpr double kQuadratureAbsFloor = 1e-15;
// Orbit points at distance 0 or m from xc sit exactly on the cap boundary
// when rho_hat = +-rho_tilde; the caps are closed, so such ties count.
constexpr double kTie = 1e-12;

enum Stream : std::uint64_t { kStreamV2 = 1, kStreamInclusion = 2, kStreamMoments = 3 };

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double proportion_se(double p, std::uint64_t n) {
  const double m = static_cast<double>(n);
  return std::sqrt(std::max(p * (1.0 - p), 1.0 / m) / m);
}

// Representative label pairs (x1, x2) for each swap triple, built by moving
// r1 and r2 cases of the block allocation with varying overlaps.
struct Representative {
  SwapTriple s;
  std::vector<double> x1;
  std::vector<double> x2;
};

std::vector<std::uint8_t> moved(const std::vector<std::uint8_t>& base, int r,
                                int case_offset, int control_offset) {
  std::vector<std::size_t> cases;
  std::vector<std::size_t> controls;
  for (std::size_t i = 0; i < base.size(); ++i) (base[i] ? cases : controls).push_back(i);
  auto out = base;
  for (int j = 0; j < r; ++j) {
    out[cases[(case_offset + j) % cases.size()]] = 0;
    out[controls[(control_offset + j) % controls.size()]] = 1;
  }
  return out;
}

std::vector<Representative> representatives(const GroupSizes& g,
                                            const std::vector<std::uint8_t>& base) {
  std::map<std::tuple<int, int, int>, Representative> found;
  const int mm = g.m_min();
  for (int r1 = 1; r1 <= mm; ++r1) {
    const auto l1 = moved(base, r1, 0, 0);
    for (int r2 = r1; r2 <= mm; ++r2) {
      for (int co = 0; co < g.m1; ++co) {
        for (int ko = 0; ko < g.m0; ++ko) {
          const auto l2 = moved(base, r2, co, ko);
          const int r3 = swap_distance(l1, l2);
          if (r3 == 0) continue;
          const auto key = std::make_tuple(r1, r2, r3);
          if (found.count(key)) continue;
          found[key] = {{r1, r2, r3}, standardized_labels(l1), standardized_labels(l2)};
        }
      }
    }
  }
  std::vector<Representative> out;
  for (auto& [key, rep] : found) out.push_back(std::move(rep));
  return out;
}

struct PairCounts {
  std::uint64_t one1 = 0, one2 = 0, two1 = 0, two2 = 0;
};

void add_quadrature_check(ValidationReport& rep, const std::string& name, double value,
                          double reference, double mc_se) {
  CheckResult c;
  c.suite = "quadrature";
  c.name = name;
  c.predicted = value;
  c.observed = reference;
  c.se = mc_se;
  c.margin = std::max(kQuadratureRelAccuracy * std::fabs(reference), kQuadratureAbsFloor);
  c.pass = std::fabs(value - reference) <= c.margin;
  rep.checks.push_back(std::move(c));
}

void v2_suite(const ValidationConfig& cfg, const GroupSizes& g, ValidationReport& rep) {
  const int d = g.dimension();
  const PointBatch z = sample_uniform_sphere(d, cfg.draws, stream_seed(cfg.seed, kStreamV2));
  for (int r = 0; r <= g.m_min(); ++r) {
    const double u = inner_product_at_swap(r, g);
    const double w = std::sqrt(std::max(0.0, (1.0 - u) * (1.0 + u)));
    for (double t : cfg.grid) {
      std::uint64_t one = 0, two = 0;
      for (std::size_t i = 0; i < z.count; ++i) {
        const auto row = z.row(i);
        const double a = row[0];
        const double b = u * row[0] + w * row[1];
        one += a >= t && b >= t;
        two += std::fabs(a) >= std::fabs(t) && std::fabs(b) >= std::fabs(t);
      }
      const double po = static_cast<double>(one) / z.count;
      const double pt = static_cast<double>(two) / z.count;
      const std::string tag = fmt("r=%g t=%g", r, t);
      const double v1 = cap_intersection_volume(u, t, d, cfg.quadrature);
      const double v2 = two_sided_cap_intersection(u, t, d, cfg.quadrature);
      const double se1 = proportion_se(v1, z.count);
      const double se2 = proportion_se(v2, z.count);
      rep.checks.push_back(compare("V2", "one-sided " + tag, v1, po, se1, cfg.k_se));
      rep.checks.push_back(compare("V2", "two-sided " + tag, v2, pt, se2, cfg.k_se));
      add_quadrature_check(rep, "V2 one-sided " + tag, v1,
                           cap_intersection_volume(u, t, d, kReferenceQuadrature), se1);
      add_quadrature_check(rep, "V2 two-sided " + tag, v2,
                           two_sided_cap_intersection(u, t, d, kReferenceQuadrature), se2);
    }
  }
}

void inclusion_suite(const ValidationConfig& cfg, const GroupSizes& g,
                     ValidationReport& rep) {
  const int d = g.dimension();
  std::vector<std::uint8_t> base(g.n(), 0);
  for (int i = g.m0; i < g.n(); ++i) base[i] = 1;
  const auto xc = standardized_labels(base);
  const auto reps = representatives(g, base);
  std::uint64_t stream = 0;
  for (double rt : cfg.grid) {
    const PointBatch ys = sample_subsphere(
        xc, rt, cfg.draws, stream_seed(stream_seed(cfg.seed, kStreamInclusion), stream++));
    for (const Representative& r : reps) {
      std::vector<double> a(ys.count);
      std::vector<double> b(ys.count);
      for (std::size_t i = 0; i < ys.count; ++i) {
        a[i] = dot(ys.row(i), r.x1);
        b[i] = dot(ys.row(i), r.x2);
      }
      const PairGeometry geo = pair_geometry(r.s, g);
      if (geo.u1 == -1.0 && geo.u2 == -1.0) continue;
      for (double rh : cfg.grid) {
        PairCounts c;
        const double h = std::fabs(rh);
        for (std::size_t i = 0; i < ys.count; ++i) {
          c.one1 += a[i] >= rh - kTie;
          c.one2 += a[i] >= rh - kTie && b[i] >= rh - kTie;
          c.two1 += std::fabs(a[i]) >= h - kTie;
          c.two2 += std::fabs(a[i]) >= h - kTie && std::fabs(b[i]) >= h - kTie;
        }
        const double n = static_cast<double>(ys.count);
        const SubsphereContext ctx(d, rt, rh);
        const std::string tag =
            fmt("(r1,r2,r3)=(%g,%g,%g)", r.s.r1, r.s.r2, r.s.r3) + fmt(" rho_tilde=%g rho_hat=%g", rt, rh);
        const double p1 = single_inclusion(geo.u1, ctx);
        const double p2 = double_inclusion(geo, ctx, cfg.quadrature);
        const double t1 = two_sided_single(geo.u1, ctx);
        const double t2 = two_sided_double(geo, ctx, cfg.quadrature);
        const double se2 = proportion_se(p2, ys.count);
        const double set2 = proportion_se(t2, ys.count);
        rep.checks.push_back(compare("P1", tag, p1, c.one1 / n, proportion_se(p1, ys.count), cfg.k_se));
        rep.checks.push_back(compare("P2", tag, p2, c.one2 / n, se2, cfg.k_se));
        rep.checks.push_back(compare("P1 two-sided", tag, t1, c.two1 / n, proportion_se(t1, ys.count), cfg.k_se));
        rep.checks.push_back(compare("P2 two-sided", tag, t2, c.two2 / n, set2, cfg.k_se));
        add_quadrature_check(rep, "P2 " + tag, p2, double_inclusion(geo, ctx, kReferenceQuadrature), se2);
        add_quadrature_check(rep, "P2 two-sided " + tag, t2,
                             two_sided_double(geo, ctx, kReferenceQuadrature), set2);
      }
    }
  }
}

void moment_suite(const ValidationConfig& cfg, const GroupSizes& g, ValidationReport& rep) {
  const auto n_orbit = exact_binomial(g.n(), g.m1);
  if (!n_orbit || *n_orbit > kMaxMomentOrbit) {
    rep.notes.push_back("moments suite skipped: orbit size exceeds " +
                        std::to_string(kMaxMomentOrbit));
    return;
  }
  const OrbitTable orbit(g, kMaxMomentOrbit);
  std::vector<std::uint8_t> base(g.n(), 0);
  for (int i = g.m0; i < g.n(); ++i) base[i] = 1;
  const double shifts[] = {0.4, 1.0, 1.8};
  const std::uint64_t root = stream_seed(cfg.seed, kStreamMoments);
  MomentOptions mo;
  mo.quadrature = cfg.quadrature;
  std::uint64_t stream = 0;
  for (int f = 0; f < 3; ++f) {
    const auto raw = synthetic_response(base, shifts[f], stream_seed(root, 100 + f));
    const StandardizedPair sp = StandardizedPair::from_raw(base, raw);
    for (Sided sided : {Sided::one, Sided::two}) {
      const std::string tag = fmt("fixture=%g rho_hat=%.6f ", f, sp.rho_hat) +
                              std::string(to_string(sided)) + "-sided";
      const SampleMoments m1 = simulate_reference1(orbit, sp.rho_hat, sided, cfg.draws,
                                                   stream_seed(root, stream++));
      rep.checks.push_back(compare("mean ref1", tag, p_hat1_estimate(sp.d, sp.rho_hat, sided),
                                   m1.mean, m1.mean_se, cfg.k_se));
      rep.checks.push_back(compare("variance ref1", tag,
                                   var_ref1(g, sp.rho_hat, sided, cfg.quadrature),
                                   m1.variance, m1.variance_se, cfg.k_se));
      for (Estimator e : {Estimator::p2, Estimator::p3}) {
        const ConditioningPoint cp = choose_conditioning_point(sp, e, sided);
        const SampleMoments m2 = simulate_reference2(orbit, cp.xc, cp.rho_tilde, sp.rho_hat,
                                                     sided, cfg.draws,
                                                     stream_seed(root, stream++));
        const std::string etag = tag + " " + std::string(to_string(e));
        rep.checks.push_back(compare("mean ref2", etag,
                                     tilde_p_c(g, sp.d, cp.rho_tilde, sp.rho_hat, sided),
                                     m2.mean, m2.mean_se, cfg.k_se));
        rep.checks.push_back(compare(
            "second moment ref2", etag,
            second_moment_ref2(g, sp.d, cp.rho_tilde, sp.rho_hat, sided, mo), m2.second,
            m2.second_se, cfg.k_se));
      }
    }
  }
}

}  // namespace

SampleMoments sample_moments(std::span<const double> values) {
  SampleMoments m;
  m.draws = values.size();
  if (values.empty()) return m;
  const double n = static_cast<double>(values.size());
  double sum = 0.0, sum2 = 0.0;
  for (double v : values) {
    sum += v;
    sum2 += v * v;
  }
  m.mean = sum / n;
  m.second = sum2 / n;
  double c2 = 0.0, c4 = 0.0, q2 = 0.0;
  for (double v : values) {
    const double e = v - m.mean;
    c2 += e * e;
    c4 += e * e * e * e;
    const double s = v * v - m.second;
    q2 += s * s;
  }
  c2 /= n;
  c4 /= n;
  q2 /= n;
  m.variance = c2 * n / std::max(1.0, n - 1.0);
  m.mean_se = std::sqrt(c2 / n);
  m.second_se = std::sqrt(q2 / n);
  m.variance_se = std::sqrt(std::max(0.0, c4 - c2 * c2) / n);
  return m;
}

PointBatch sample_sum_zero_sphere(int n, std::size_t count, std::uint64_t seed) {
  if (n < 3) throw DomainError("sample_sum_zero_sphere needs n >= 3");
  PointBatch batch = sample_uniform_sphere(n - 1, count, seed);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < count; ++i) {
    double* row = batch.data.data() + i * batch.dim;
    for (int pass = 0; pass < 2; ++pass) {
      const double mean = std::accumulate(row, row + n, 0.0) / n;
      for (int j = 0; j < n; ++j) row[j] -= mean;
    }
    double norm2 = 0.0;
    for (int j = 0; j < n; ++j) norm2 += row[j] * row[j];
    const double inv = 1.0 / std::sqrt(norm2);
    for (int j = 0; j < n; ++j) row[j] *= inv;
  }
  return batch;
}

namespace {

SampleMoments p_value_moments(const OrbitTable& orbit, const PointBatch& ys, double t,
                              Sided sided) {
  std::vector<double> p(ys.count);
  const long count = static_cast<long>(ys.count);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) p[i] = orbit.p_value(ys.row(i), t, sided);
  return sample_moments(p);
}

}  // namespace

SampleMoments simulate_reference1(const OrbitTable& orbit, double t, Sided sided,
                                  std::uint64_t draws, std::uint64_t seed) {
  return p_value_moments(orbit, sample_sum_zero_sphere(orbit.groups().n(), draws, seed), t,
                         sided);
}

SampleMoments simulate_reference2(const OrbitTable& orbit, std::span<const double> xc,
                                  double rho_tilde, double rho_hat, Sided sided,
                                  std::uint64_t draws, std::uint64_t seed) {
  return p_value_moments(orbit, sample_subsphere(xc, rho_tilde, draws, seed), rho_hat,
                         sided);
}

CheckResult compare(std::string suite, std::string name, double predicted,
                    double observed, double se, double k, double floor) {
  CheckResult c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  c.predicted = predicted;
  c.observed = observed;
  c.se = se;
  c.margin = std::max(k * se, floor);
  c.pass = std::fabs(predicted - observed) <= c.margin;
  return c;
}

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

ValidationReport run_validation(const ValidationConfig& cfg) {
  cfg.quadrature.validate();
  if (cfg.draws < 2) throw DomainError("validation needs at least two draws");
  if (!(cfg.k_se > 0.0)) throw DomainError("k_se must be positive");
  if (cfg.grid.empty()) throw DomainError("validation grid is empty");
  for (double t : cfg.grid) {
    if (!(t >= -1.0 && t <= 1.0)) throw DomainError("grid values must lie in [-1, 1]");
  }
  const GroupSizes g(cfg.m0, cfg.m1);
  ValidationReport rep;
  v2_suite(cfg, g, rep);
  inclusion_suite(cfg, g, rep);
  moment_suite(cfg, g, rep);
  return rep;
}

std::vector<double> synthetic_response(std::span<const std::uint8_t> labels, double shift,
                                       std::uint64_t seed) {
  Rng rng(seed, 0);
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = shift * labels[i] + rng.normal();
  return y;
}

}  // namespace permcap
