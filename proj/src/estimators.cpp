#include "permcap/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <exception>
#include <numeric>
#include <string>

#include "permcap/errors.hpp"
#include "permcap/inclusion_probability.hpp"
#include "permcap/special_functions.hpp"
#include "permcap/sphere_geometry.hpp"

namespace permcap {

namespace {

constexpr double kLn10 = 2.302585092994045684;
constexpr double kNegativeVarianceSlack = 1e-10;

double dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

void check_dimension(const GroupSizes& g, int d) {
  if (d != g.dimension()) {
    throw DomainError("dimension must equal m0 + m1 - 2");
  }
}

std::vector<std::uint8_t> assign_top(std::span<const double> y, int m1,
                                     bool largest) {
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return largest ? y[a] > y[b] : y[a] < y[b];
  });
  std::vector<std::uint8_t> labels(y.size(), 0);
  for (int k = 0; k < m1; ++k) labels[order[k]] = 1;
  return labels;
}

double single_term(double u, const SubsphereContext& ctx, Sided sided) {
  return sided == Sided::one ? single_inclusion(u, ctx) : two_sided_single(u, ctx);
}

double double_term(const PairGeometry& geo, const SubsphereContext& ctx,
                   Sided sided, const QuadratureConfig& q) {
  return sided == Sided::one ? double_inclusion(geo, ctx, q)
                             : two_sided_double(geo, ctx, q);
}

double v2_term(double u, double t, int d, Sided sided, const QuadratureConfig& q) {
  return sided == Sided::one ? cap_intersection_volume(u, t, d, q)
                             : two_sided_cap_intersection(u, t, d, q);
}

// 1/N from the exact orbit size when it is representable.
double inverse_orbit_size(const GroupSizes& g) {
  const OrbitSize n = orbit_size(g);
  return n.exact ? 1.0 / static_cast<double>(*n.exact) : std::exp(-n.log_n);
}

QuadratureError cell_error(const QuadratureError& e, const SwapTriple& s) {
  return QuadratureError(std::string(e.what()) + " at (r1, r2, r3) = (" +
                             std::to_string(s.r1) + ", " + std::to_string(s.r2) +
                             ", " + std::to_string(s.r3) + ")",
                         e.estimate(), e.error());
}

}  // namespace

std::string_view to_string(Sided s) { return s == Sided::one ? "one" : "two"; }

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::p1: return "p1";
    case Estimator::p2: return "p2";
    case Estimator::p3: return "p3";
  }
  return "?";
}

std::vector<double> standardized_labels(std::span<const std::uint8_t> labels) {
  int m1 = 0;
  for (auto v : labels) {
    if (v > 1) throw DomainError("labels must be 0 or 1");
    m1 += v;
  }
  const GroupSizes g(static_cast<int>(labels.size()) - m1, m1);
  const double n = g.n();
  const double neg = -std::sqrt(g.m1 / (n * g.m0));
  const double pos = std::sqrt(g.m0 / (n * g.m1));
  std::vector<double> x(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) x[i] = labels[i] ? pos : neg;
  return x;
}

StandardizedPair StandardizedPair::from_raw(std::span<const std::uint8_t> labels,
                                            std::span<const double> response) {
  if (labels.size() != response.size()) {
    throw DomainError("labels and response differ in length");
  }
  StandardizedPair sp;
  sp.labels.assign(labels.begin(), labels.end());
  sp.x0 = standardized_labels(labels);
  const int m1 = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
  sp.g = GroupSizes(static_cast<int>(labels.size()) - m1, m1);
  sp.d = sp.g.dimension();

  CompensatedSum total;
  double scale = 0.0;
  for (double v : response) {
    if (!std::isfinite(v)) throw DomainError("response has non-finite values");
    total.add(v);
    scale = std::max(scale, std::fabs(v));
  }
  const double mean = total.value() / static_cast<double>(response.size());
  sp.y0.resize(response.size());
  for (std::size_t i = 0; i < response.size(); ++i) sp.y0[i] = response[i] - mean;
  const double norm = std::sqrt(dot(sp.y0, sp.y0));
  if (!(norm > 1e-13 * scale * std::sqrt(static_cast<double>(response.size())))) {
    throw DegenerateInput("response has zero variance");
  }
  for (double& v : sp.y0) v /= norm;
  sp.rho_hat = std::clamp(dot(sp.x0, sp.y0), -1.0, 1.0);
  return sp;
}

ConditioningPoint choose_conditioning_point(const StandardizedPair& sp,
                                            Estimator estimator, Sided sided) {
  ConditioningPoint cp;
  if (estimator != Estimator::p3) {
    cp.labels = sp.labels;
    cp.xc = sp.x0;
    cp.rho_tilde = sp.rho_hat;
    return cp;
  }
  auto candidate = [&](bool largest) {
    ConditioningPoint c;
    c.labels = assign_top(sp.y0, sp.g.m1, largest);
    c.xc = standardized_labels(c.labels);
    c.swap_distance = swap_distance(c.labels, sp.labels);
    c.rho_tilde = c.swap_distance == 0 ? sp.rho_hat
                                       : std::clamp(dot(c.xc, sp.y0), -1.0, 1.0);
    return c;
  };
  cp = candidate(true);
  if (sided == Sided::one) {
    cp.rho_tilde = std::max(cp.rho_tilde, sp.rho_hat);
    return cp;
  }
  ConditioningPoint low = candidate(false);
  if (std::fabs(low.rho_tilde) > std::fabs(cp.rho_tilde)) cp = std::move(low);
  if (std::fabs(cp.rho_tilde) < std::fabs(sp.rho_hat)) {
    cp.rho_tilde = std::copysign(std::fabs(sp.rho_hat), cp.rho_tilde);
  }
  return cp;
}

double p_hat1_estimate(int d, double rho_hat, Sided sided) {
  if (sided == Sided::one) return cap_volume(d, rho_hat);
  return 2.0 * cap_volume(d, std::fabs(rho_hat));
}

double var_ref1(const GroupSizes& g, double t, Sided sided,
                const QuadratureConfig& q) {
  q.validate();
  const SwapCombinatorics sc(g);
  const int d = g.dimension();
  const int mm = g.m_min();
  std::vector<double> terms(mm + 1);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r <= mm; ++r) {
    try {
      const double w = std::exp(sc.count_at_distance(r) - sc.log_n());
      terms[r] = w * v2_term(inner_product_at_swap(r, g), t, d, sided, q);
    } catch (...) {
#pragma omp critical(permcap_var_ref1)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  CompensatedSum s;
  for (double v : terms) s.add(v);
  const double p1 = p_hat1_estimate(d, t, sided);
  s.add(-p1 * p1);
  return s.value();
}

double tilde_p_c(const GroupSizes& g, int d, double rho_tilde, double rho_hat,
                 Sided sided) {
  check_dimension(g, d);
  const SwapCombinatorics sc(g);
  const SubsphereContext ctx(d, rho_tilde, rho_hat);
  CompensatedSum s;
  s.add(inverse_orbit_size(g) * single_term(1.0, ctx, sided));
  for (int r = 1; r <= g.m_min(); ++r) {
    const double w = std::exp(sc.count_at_distance(r) - sc.log_n());
    s.add(w * single_term(inner_product_at_swap(r, g), ctx, sided));
  }
  return s.value();
}

double second_moment_ref2(const GroupSizes& g, int d, double rho_tilde,
                          double rho_hat, Sided sided, const MomentOptions& opt) {
  check_dimension(g, d);
  opt.quadrature.validate();
  const SwapCombinatorics sc(g);
  const SubsphereContext ctx(d, rho_tilde, rho_hat);
  const double log_n2 = 2.0 * sc.log_n();
  const int mm = g.m_min();

  std::vector<double> p1(mm + 1);
  for (int r = 0; r <= mm; ++r) p1[r] = single_term(inner_product_at_swap(r, g), ctx, sided);

  // Cells with a coincidence among x_k, x_l, xc need no quadrature.
  CompensatedSum known;
  known.add(std::exp(-log_n2) *
            double_term(pair_geometry({0, 0, 0}, g), ctx, sided, opt.quadrature));
  for (int r = 1; r <= mm; ++r) {
    const double w = std::exp(sc.count_at_distance(r) - log_n2);
    known.add(2.0 * w *
              double_term(pair_geometry({0, r, r}, g), ctx, sided, opt.quadrature));
    known.add(w * p1[r]);
  }

  struct Cell {
    SwapTriple s;
    double weight;
    double bound;
  };
  std::vector<Cell> cells;
  for (int r1 = 1; r1 <= mm; ++r1) {
    for (int r2 = r1; r2 <= mm; ++r2) {
      const double bound_p = std::min(p1[r1], p1[r2]);
      const IntRange r3s = r3_range(r1, r2, g);
      for (int r3 = r3s.lo; r3 <= r3s.hi; ++r3) {
        double lc = sc.triple_config_count({r1, r2, r3});
        if (r1 != r2) {
          const double mirror = sc.triple_config_count({r2, r1, r3});
          const double top = std::max(lc, mirror);
          if (top != -std::numeric_limits<double>::infinity()) {
            lc = top + std::log(std::exp(lc - top) + std::exp(mirror - top));
          }
        }
        const double w = std::exp(lc - log_n2);
        if (w == 0.0 || bound_p == 0.0) continue;
        cells.push_back({{r1, r2, r3}, w, w * bound_p});
      }
    }
  }

  std::vector<std::size_t> by_bound(cells.size());
  std::iota(by_bound.begin(), by_bound.end(), std::size_t{0});
  std::stable_sort(by_bound.begin(), by_bound.end(), [&](std::size_t a, std::size_t b) {
    return cells[a].bound < cells[b].bound;
  });
  std::vector<char> skip(cells.size(), 0);
  const double budget = opt.prune_rel_tol * known.value();
  double skipped = 0.0;
  for (std::size_t i : by_bound) {
    if (skipped + cells[i].bound > budget) break;
    skipped += cells[i].bound;
    skip[i] = 1;
  }

  std::vector<double> values(cells.size(), 0.0);
  std::exception_ptr failure;
  const long count = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < count; ++i) {
    if (skip[i]) continue;
    try {
      values[i] = cells[i].weight *
                  double_term(pair_geometry(cells[i].s, g), ctx, sided, opt.quadrature);
    } catch (const QuadratureError& e) {
#pragma omp critical(permcap_second_moment)
      if (!failure) failure = std::make_exception_ptr(cell_error(e, cells[i].s));
    } catch (...) {
#pragma omp critical(permcap_second_moment)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  CompensatedSum total;
  total.add(known.value());
  for (double v : values) total.add(v);
  return total.value();
}

double mse_under_ref2(double estimate, double mean, double second_moment) {
  return second_moment - 2.0 * estimate * mean + estimate * estimate;
}

MomentReport report(const StandardizedPair& sp, Estimator estimator, Sided sided,
                    const ReportOptions& opt) {
  MomentReport rep;
  rep.estimator = estimator;
  rep.sided = sided;
  rep.rho_hat = sp.rho_hat;
  const double log_n = log_orbit_size(sp.g);
  rep.granularity = inverse_orbit_size(sp.g);
  rep.log10_granularity = -log_n / kLn10;
  const QuadratureConfig& q = opt.moments.quadrature;

  if (estimator == Estimator::p1) {
    rep.rho_tilde = sp.rho_hat;
    rep.estimate = p_hat1_estimate(sp.d, sp.rho_hat, sided);
    const double h = sided == Sided::one ? sp.rho_hat : std::fabs(sp.rho_hat);
    rep.log10_estimate = (log_cap_volume(sp.d, h) +
                          (sided == Sided::two ? std::log(2.0) : 0.0)) / kLn10;
    if (opt.with_moments) {
      const double var = var_ref1(sp.g, sp.rho_hat, sided, q);
      rep.second_moment = var + rep.estimate * rep.estimate;
      const double mean2 = tilde_p_c(sp.g, sp.d, sp.rho_hat, sp.rho_hat, sided);
      const double second2 =
          second_moment_ref2(sp.g, sp.d, sp.rho_hat, sp.rho_hat, sided, opt.moments);
      rep.rmse_ref2 = std::sqrt(std::max(0.0, mse_under_ref2(rep.estimate, mean2, second2)));
    }
  } else {
    const ConditioningPoint cp = choose_conditioning_point(sp, estimator, sided);
    rep.rho_tilde = cp.rho_tilde;
    rep.conditioning_distance = cp.swap_distance;
    const double mean = tilde_p_c(sp.g, sp.d, cp.rho_tilde, sp.rho_hat, sided);
    const double upper = sided == Sided::one ? 1.0 : 2.0;
    rep.estimate = std::clamp(mean, rep.granularity, upper);
    rep.log10_estimate = std::log10(rep.estimate);
    if (opt.with_moments) {
      rep.second_moment =
          second_moment_ref2(sp.g, sp.d, cp.rho_tilde, sp.rho_hat, sided, opt.moments);
    }
  }

  if (opt.with_moments) {
    rep.has_moments = true;
    const double est2 = rep.estimate * rep.estimate;
    double var = rep.second_moment - est2;
    if (var < -kNegativeVarianceSlack * est2) rep.variance_clamped = true;
    var = std::max(0.0, var);
    rep.variance = var;
    rep.rmse = std::sqrt(var);
    rep.cv = rep.rmse == 0.0 ? 0.0 : rep.rmse / rep.estimate;
  }
  return rep;
}

ChebychevResult chebychev_bound(double mu, double sigma) {
  if (!(mu >= 0.0) || !(sigma >= 0.0)) {
    throw DomainError("chebychev_bound needs mu >= 0 and sigma >= 0");
  }
  ChebychevResult out;
  out.closed_form = mu + (std::cbrt(2.0) + std::pow(2.0, -2.0 / 3.0)) *
                             std::pow(sigma, 2.0 / 3.0);
  if (sigma == 0.0) {
    out.p_star = mu;
    out.lambda = std::numeric_limits<double>::infinity();
    return out;
  }
  auto p_at = [&](double lambda) {
    return mu + lambda * sigma + 1.0 / (1.0 + lambda * lambda);
  };
  // Stationary points solve 2 lambda = sigma (1 + lambda^2)^2; the minimum is
  // the root beyond the peak of 2 lambda / (1 + lambda^2)^2 at 1/sqrt(3).
  auto excess = [&](double lambda) {
    const double s = 1.0 + lambda * lambda;
    return sigma * s * s - 2.0 * lambda;
  };
  double best_lambda = 0.0;
  double best = p_at(0.0);
  double lo = 1.0 / std::sqrt(3.0);
  if (excess(lo) < 0.0) {
    double hi = std::max(1.0, 2.0 * std::cbrt(2.0 / sigma));
    while (excess(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    if (p_at(lambda) < best) {
      best = p_at(lambda);
      best_lambda = lambda;
    }
  }
  out.p_star = best;
  out.lambda = best_lambda;
  return out;
}

double z_score(double p_true, double estimate, double rmse) {
  if (!(rmse >= 0.0)) throw DomainError("z_score needs rmse >= 0");
  if (rmse == 0.0) {
    const double scale = std::max(std::fabs(p_true), std::fabs(estimate));
    if (std::fabs(p_true - estimate) <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
      return 0.0;
    }
    return p_true > estimate ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
  }
  return (p_true - estimate) / rmse;
}

namespace reference {

double second_moment_ref2(const GroupSizes& g, int d, double rho_tilde,
                          double rho_hat, Sided sided, const QuadratureConfig& q) {
  check_dimension(g, d);
  q.validate();
  const SwapCombinatorics sc(g);
  const SubsphereContext ctx(d, rho_tilde, rho_hat);
  const double log_n2 = 2.0 * sc.log_n();
  CompensatedSum total;
  for (const PairClass& c : sc.census()) {
    const double w = std::exp(c.log_count - log_n2);
    try {
      total.add(w * double_term(pair_geometry(c.triple, g), ctx, sided, q));
    } catch (const QuadratureError& e) {
      throw cell_error(e, c.triple);
    }
  }
  return total.value();
}

double var_ref1(const GroupSizes& g, double t, Sided sided,
                const QuadratureConfig& q) {
  q.validate();
  const SwapCombinatorics sc(g);
  const int d = g.dimension();
  CompensatedSum s;
  for (int r = 0; r <= g.m_min(); ++r) {
    const double w = std::exp(sc.count_at_distance(r) - sc.log_n());
    s.add(w * v2_term(inner_product_at_swap(r, g), t, d, sided, q));
  }
  const double p1 = p_hat1_estimate(d, t, sided);
  s.add(-p1 * p1);
  return s.value();
}

}  // namespace reference

}  // namespace permcap
