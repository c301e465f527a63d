#pragma once

// Volumes on the unit sphere S^d = {z in R^{d+1} : |z| = 1}. All volumes are
// normalized so the whole sphere has measure one.

#include "permcap/quadrature.hpp"

namespace permcap {

/// Margin within which cap heights are snapped onto [-1, 1].
inline constexpr double kHeightMargin = 1e-12;
/// Margin within which inner products and their ratios are snapped onto [-1, 1].
inline constexpr double kInnerProductMargin = 1e-9;

/// Clamp an inner-product-like value onto [-1, 1]; throws DomainError when it
/// lies more than `margin` outside.
double clamp_unit(double value, double margin, const char* what);

/// Surface volume of S^d: 2 pi^{(d+1)/2} / Gamma((d+1)/2).
double surface_volume(int d);
double log_surface_volume(int d);

/// The density of <z, x> for z uniform on S^d and fixed unit x:
/// (omega_{d-1} / omega_d) (1 - s^2)^{d/2 - 1}. Requires d >= 1.
double projection_density(int d, double s);

/// Normalized volume of the cap {z : <y, z> >= t} on S^d.
/// Requires d >= 1 and t within kHeightMargin of [-1, 1].
double cap_volume(int d, double t);
/// log of cap_volume, accurate where the volume underflows a linear product.
double log_cap_volume(int d, double t);

/// A spherical cap on S^d of height t.
class CapSpec {
 public:
  CapSpec(int d, double t);

  int dimension() const noexcept { return d_; }
  double height() const noexcept { return t_; }
  double volume() const { return cap_volume(d_, t_); }
  double log_volume() const { return log_cap_volume(d_, t_); }

 private:
  int d_;
  double t_;
};

/// Saturating cap volume: any real height, d >= 0. Heights above 1 give 0,
/// heights at or below -1 give 1. On S^0 = {x, -x} a height in (-1, 1] keeps
/// exactly one of the two points.
double cap_mass(int d, double h);

/// Pr(<z, e> >= a and <z, v> >= b) for z uniform on S^d, unit vectors e, v
/// with <e, v> = u in (-1, 1), and arbitrary real heights a, b.
///
/// Integrates over the polar angle theta of z about e. The band of angles
/// where the slice {<z, e> = cos theta} only partly meets the second cap is
/// [|gamma - beta|, min(gamma + beta, 2 pi - gamma - beta)] with
/// gamma = acos u and beta = acos b; outside it the slice is wholly in or
/// wholly out and contributes a closed-form cap difference. Only the partial
/// band is integrated numerically. Requires d >= 1.
double two_cap_mass(int d, double a, double b, double u,
                    const QuadratureConfig& q);

/// V2(u; t, d): volume of the intersection of two caps of common height t
/// whose centers have inner product u. Requires d >= 2.
double cap_intersection_volume(double u, double t, int d,
                               const QuadratureConfig& q = {});

/// Two-sided variant: Pr(|<z, x1>| >= |t| and |<z, x2>| >= |t|)
/// = 2 V2(u; |t|, d) + 2 V2(-u; |t|, d).
double two_sided_cap_intersection(double u, double t, int d,
                                  const QuadratureConfig& q = {});

}  // namespace permcap
