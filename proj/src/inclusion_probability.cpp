#include "permcap/inclusion_probability.hpp"

#include <algorithm>
#include <cmath>

#include "permcap/errors.hpp"
#include "permcap/sphere_geometry.hpp"

namespace permcap {

namespace {

__extension__ typedef __int128 Int128;

constexpr double kClassTolerance = 1e-12;
// Inner products equal to the cap height up to rounding lie on the closed
// cap boundary and count as inside.
constexpr double kBoundaryTie = 1e-12;

// Inner products of the two points with xc and of their xc-orthogonal parts.
struct Resolved {
  double a1;
  double a2;
  double u3_star;
};

double inside(double v, double h) { return v >= h - kBoundaryTie ? 1.0 : 0.0; }

bool near(double x, double y) { return std::fabs(x - y) <= kClassTolerance; }

double orthogonal_height(double h, double rho_tilde, double a) {
  const double denom =
      std::sqrt((1.0 - rho_tilde) * (1.0 + rho_tilde) * (1.0 - a) * (1.0 + a));
  return (h - rho_tilde * a) / denom;
}

double p1_core(double u1, int d, double rho_tilde, double h) {
  if (u1 == 1.0 || u1 == -1.0 || rho_tilde == 1.0 || rho_tilde == -1.0) {
    return inside(rho_tilde * u1, h);
  }
  return cap_mass(d - 1, orthogonal_height(h, rho_tilde, u1));
}

double p2_core(const Resolved& r, int d, double rho_tilde, double h,
               const QuadratureConfig& q) {
  if (r.a1 == 1.0 || r.a1 == -1.0) {
    return inside(r.a1 * rho_tilde, h) * p1_core(r.a2, d, rho_tilde, h);
  }
  if (r.a2 == 1.0 || r.a2 == -1.0) {
    return inside(r.a2 * rho_tilde, h) * p1_core(r.a1, d, rho_tilde, h);
  }
  if (rho_tilde == 1.0 || rho_tilde == -1.0) {
    return inside(rho_tilde * r.a1, h) * inside(rho_tilde * r.a2, h);
  }
  const double rho1 = orthogonal_height(h, rho_tilde, r.a1);
  const double rho2 = orthogonal_height(h, rho_tilde, r.a2);
  if (r.u3_star == 1.0) return cap_mass(d - 1, std::max(rho1, rho2));
  if (r.u3_star == -1.0) {
    return std::max(0.0, cap_mass(d - 1, rho1) - cap_mass(d - 1, -rho2));
  }
  return two_cap_mass(d - 1, rho1, rho2, r.u3_star, q);
}

Resolved resolve(double u1, double u2, double u3, EqualityClass cls) {
  u1 = clamp_unit(u1, kInnerProductMargin, "u1");
  u2 = clamp_unit(u2, kInnerProductMargin, "u2");
  u3 = clamp_unit(u3, kInnerProductMargin, "u3");
  switch (cls) {
    case EqualityClass::all_equal:
      if (!near(u1, 1.0) || !near(u2, 1.0) || !near(u3, 1.0)) break;
      return {1.0, 1.0, 1.0};
    case EqualityClass::first_is_center:
      if (!near(u1, 1.0) || !near(u3, u2) || near(u2, 1.0)) break;
      return {1.0, u2, 1.0};
    case EqualityClass::second_is_center:
      if (!near(u2, 1.0) || !near(u3, u1) || near(u1, 1.0)) break;
      return {u1, 1.0, 1.0};
    case EqualityClass::pair_equal:
      if (!near(u3, 1.0) || !near(u1, u2) || near(u1, 1.0)) break;
      return {u1, u1, 1.0};
    case EqualityClass::distinct: {
      if (u1 >= 1.0 || u2 >= 1.0 || u3 >= 1.0) break;
      if (u1 == -1.0 && u2 == -1.0) {
        throw DomainError("distinct points cannot both be antipodal to xc");
      }
      if (u1 == -1.0 || u2 == -1.0) return {u1, u2, 1.0};
      const double star = (u3 - u1 * u2) /
                          std::sqrt((1.0 - u1) * (1.0 + u1) * (1.0 - u2) * (1.0 + u2));
      return {u1, u2, clamp_unit(star, kInnerProductMargin, "u3*")};
    }
  }
  throw DomainError("inner products inconsistent with the equality class");
}

Resolved resolve(const PairGeometry& geo) {
  switch (geo.cls) {
    case EqualityClass::all_equal:
      return {1.0, 1.0, 1.0};
    case EqualityClass::first_is_center:
      return {1.0, geo.u2, 1.0};
    case EqualityClass::second_is_center:
      return {geo.u1, 1.0, 1.0};
    case EqualityClass::pair_equal:
      return {geo.u1, geo.u1, 1.0};
    case EqualityClass::distinct:
      if (geo.u1 == -1.0 && geo.u2 == -1.0) {
        throw DomainError("distinct points cannot both be antipodal to xc");
      }
      return {geo.u1, geo.u2, geo.u3_star};
  }
  return {1.0, 1.0, 1.0};
}

double two_sided_core(const Resolved& r, const SubsphereContext& ctx,
                      const QuadratureConfig& q) {
  const double h = std::fabs(ctx.rho_hat);
  if (h == 0.0) return 1.0;
  const double rt = ctx.rho_tilde;
  const int d = ctx.d;
  return p2_core(r, d, rt, h, q) +
         p2_core({-r.a1, r.a2, -r.u3_star}, d, rt, h, q) +
         p2_core({r.a1, -r.a2, -r.u3_star}, d, rt, h, q) +
         p2_core({-r.a1, -r.a2, r.u3_star}, d, rt, h, q);
}

}  // namespace

SubsphereContext::SubsphereContext(int dim, double rt, double rh)
    : d(dim),
      rho_tilde(clamp_unit(rt, kHeightMargin, "rho_tilde")),
      rho_hat(clamp_unit(rh, kHeightMargin, "rho_hat")) {
  if (d < 2) throw DomainError("subsphere context needs d >= 2");
}

EqualityClass equality_class(const SwapTriple& s) {
  if (s.r1 == 0 && s.r2 == 0) return EqualityClass::all_equal;
  if (s.r1 == 0) return EqualityClass::first_is_center;
  if (s.r2 == 0) return EqualityClass::second_is_center;
  if (s.r3 == 0) return EqualityClass::pair_equal;
  return EqualityClass::distinct;
}

PairGeometry pair_geometry(const SwapTriple& s, const GroupSizes& g) {
  PairGeometry geo;
  geo.cls = equality_class(s);
  geo.u1 = inner_product_at_swap(s.r1, g);
  geo.u2 = inner_product_at_swap(s.r2, g);
  geo.u3 = inner_product_at_swap(s.r3, g);
  if (geo.cls != EqualityClass::distinct) return geo;

  const Int128 p = static_cast<Int128>(g.m0) * g.m1;
  const Int128 n = g.n();
  const Int128 f1 = 2 * p - s.r1 * n;
  const Int128 f2 = 2 * p - s.r2 * n;
  if (f1 == 0 || f2 == 0) return geo;
  const Int128 a = static_cast<Int128>(s.r1 + s.r2 - s.r3) * p - static_cast<Int128>(s.r1) * s.r2 * n;
  const Int128 b = static_cast<Int128>(s.r1) * s.r2 * f1 * f2;
  if (a * a == b) {
    geo.u3_star = a > 0 ? 1.0 : -1.0;
  } else {
    const double v = static_cast<double>(a) / std::sqrt(static_cast<double>(b));
    geo.u3_star = clamp_unit(v, kInnerProductMargin, "u3*");
  }
  return geo;
}

double single_inclusion(double u1, const SubsphereContext& ctx) {
  u1 = clamp_unit(u1, kInnerProductMargin, "u1");
  return p1_core(u1, ctx.d, ctx.rho_tilde, ctx.rho_hat);
}

double double_inclusion(double u1, double u2, double u3, EqualityClass cls,
                        const SubsphereContext& ctx, const QuadratureConfig& q) {
  return p2_core(resolve(u1, u2, u3, cls), ctx.d, ctx.rho_tilde, ctx.rho_hat, q);
}

double double_inclusion(const PairGeometry& geo, const SubsphereContext& ctx,
                        const QuadratureConfig& q) {
  return p2_core(resolve(geo), ctx.d, ctx.rho_tilde, ctx.rho_hat, q);
}

double two_sided_single(double u1, const SubsphereContext& ctx) {
  u1 = clamp_unit(u1, kInnerProductMargin, "u1");
  const double h = std::fabs(ctx.rho_hat);
  if (h == 0.0) return 1.0;
  return p1_core(u1, ctx.d, ctx.rho_tilde, h) + p1_core(-u1, ctx.d, ctx.rho_tilde, h);
}

double two_sided_double(double u1, double u2, double u3, EqualityClass cls,
                        const SubsphereContext& ctx, const QuadratureConfig& q) {
  return two_sided_core(resolve(u1, u2, u3, cls), ctx, q);
}

double two_sided_double(const PairGeometry& geo, const SubsphereContext& ctx,
                        const QuadratureConfig& q) {
  return two_sided_core(resolve(geo), ctx, q);
}

}  // namespace permcap
