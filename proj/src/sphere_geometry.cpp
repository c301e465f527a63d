#include "permcap/sphere_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "permcap/errors.hpp"
#include "permcap/special_functions.hpp"

namespace permcap {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dimension(int d, int minimum, const char* what) {
  if (d < minimum) {
    throw DomainError(std::string(what) + ": sphere dimension must be >= " +
                      std::to_string(minimum));
  }
}

double checked_height(double t) {
  return clamp_unit(t, kHeightMargin, "cap height");
}

// Cap volume for a height already known to lie in [0, 1].
double upper_cap(int d, double t) {
  return 0.5 * incomplete_beta(0.5 * d, 0.5, (1.0 - t) * (1.0 + t), t * t);
}

// log(omega_{d-1} / omega_d) = log Gamma((d+1)/2) - log Gamma(d/2) - log(pi)/2.
double log_slice_constant(int d) {
  return log_gamma(0.5 * (d + 1)) - log_gamma(0.5 * d) - 0.5 * std::log(kPi);
}

// Pr(angle between z and a fixed pole <= phi) on S^d, phi in [0, pi].
double angle_cdf(int d, double phi) {
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double half = 0.5 * incomplete_beta(0.5 * d, 0.5, s * s, c * c);
  return phi <= 0.5 * kPi ? half : 1.0 - half;
}

double angle_tail(int d, double phi) { return angle_cdf(d, kPi - phi); }

// Pr(lo <= angle <= hi) on S^d without cancellation in either tail.
double band_mass(int d, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (hi <= 0.5 * kPi) return angle_cdf(d, hi) - angle_cdf(d, lo);
  if (lo >= 0.5 * kPi) return angle_tail(d, lo) - angle_tail(d, hi);
  return 1.0 - angle_cdf(d, lo) - angle_tail(d, hi);
}

}  // namespace

double clamp_unit(double value, double margin, const char* what) {
  if (std::isnan(value) || value > 1.0 + margin || value < -1.0 - margin) {
    throw DomainError(std::string(what) + " outside [-1, 1]: " +
                      std::to_string(value));
  }
  return std::clamp(value, -1.0, 1.0);
}

double log_surface_volume(int d) {
  require_dimension(d, 0, "surface_volume");
  const double h = 0.5 * (d + 1);
  return std::log(2.0) + h * std::log(kPi) - log_gamma(h);
}

double surface_volume(int d) { return std::exp(log_surface_volume(d)); }

double projection_density(int d, double s) {
  require_dimension(d, 1, "projection_density");
  s = clamp_unit(s, kHeightMargin, "projection coordinate");
  const double w = (1.0 - s) * (1.0 + s);
  return std::exp(log_slice_constant(d) + (0.5 * d - 1.0) * std::log(w));
}

double cap_volume(int d, double t) {
  require_dimension(d, 1, "cap_volume");
  t = checked_height(t);
  if (t >= 0.0) return upper_cap(d, t);
  return 1.0 - upper_cap(d, -t);
}

double log_cap_volume(int d, double t) {
  require_dimension(d, 1, "log_cap_volume");
  t = checked_height(t);
  if (t >= 0.0) {
    return std::log(0.5) +
           log_incomplete_beta(0.5 * d, 0.5, (1.0 - t) * (1.0 + t), t * t);
  }
  return std::log1p(-upper_cap(d, -t));
}

CapSpec::CapSpec(int d, double t) : d_(d), t_(checked_height(t)) {
  require_dimension(d, 1, "CapSpec");
}

double cap_mass(int d, double h) {
  require_dimension(d, 0, "cap_mass");
  if (std::isnan(h)) throw DomainError("cap_mass: height is NaN");
  if (h <= -1.0) return 1.0;
  if (d == 0) return h <= 1.0 ? 0.5 : 0.0;
  if (h >= 1.0) return 0.0;
  return h >= 0.0 ? upper_cap(d, h) : 1.0 - upper_cap(d, -h);
}

double two_cap_mass(int d, double a, double b, double u,
                    const QuadratureConfig& q) {
  require_dimension(d, 1, "two_cap_mass");
  if (!(u > -1.0 && u < 1.0)) {
    throw DomainError("two_cap_mass: center inner product must lie in (-1, 1)");
  }
  if (std::isnan(a) || std::isnan(b)) throw DomainError("two_cap_mass: NaN height");
  if (a >= 1.0 || b >= 1.0) return 0.0;
  if (a <= -1.0) return cap_mass(d, b);
  if (b <= -1.0) return cap_mass(d, a);

  const double alpha = std::acos(a);
  const double beta = std::acos(b);
  const double gamma = std::acos(u);
  const double partial_lo = std::fabs(gamma - beta);
  const double partial_hi = std::min(gamma + beta, 2.0 * kPi - gamma - beta);

  CompensatedSum total;
  if (beta > gamma) total.add(band_mass(d, 0.0, std::min(partial_lo, alpha)));
  if (gamma + beta > kPi) total.add(band_mass(d, partial_hi, alpha));

  const double lo = partial_lo;
  const double hi = std::min(partial_hi, alpha);
  if (hi > lo) {
    const double log_c = log_slice_constant(d);
    const double sin_gamma = std::sqrt((1.0 - u) * (1.0 + u));
    auto integrand = [&](double theta) {
      const double s = std::sin(theta);
      if (!(s > 0.0)) return 0.0;
      const double rho = (b - std::cos(theta) * u) / (s * sin_gamma);
      const double inner = cap_mass(d - 1, rho);
      if (inner == 0.0) return 0.0;
      return std::exp(log_c + (d - 1) * std::log(s)) * inner;
    };
    const double bound = std::min(band_mass(d, lo, hi), cap_mass(d, b));
    const auto r = integrate_adaptive(integrand, lo, hi, q, bound);
    if (!r.converged) {
      throw QuadratureError("two-cap intersection quadrature did not converge",
                            r.value, r.error);
    }
    total.add(r.value);
  }
  return std::clamp(total.value(), 0.0, 1.0);
}

double cap_intersection_volume(double u, double t, int d,
                               const QuadratureConfig& q) {
  require_dimension(d, 2, "cap_intersection_volume");
  q.validate();
  u = clamp_unit(u, kInnerProductMargin, "cap center inner product");
  t = checked_height(t);
  if (u == 1.0) return cap_volume(d, t);
  if (u == -1.0) return t >= 0.0 ? 0.0 : 1.0 - 2.0 * cap_volume(d, -t);
  return two_cap_mass(d, t, t, u, q);
}

double two_sided_cap_intersection(double u, double t, int d,
                                  const QuadratureConfig& q) {
  const double h = std::fabs(t);
  const double v = 2.0 * cap_intersection_volume(u, h, d, q) +
                   2.0 * cap_intersection_volume(-u, h, d, q);
  return std::min(v, 1.0);
}

}  // namespace permcap
