#pragma once

// Inclusion probabilities of orbit points in a random cap of height rho_hat
// whose center y is uniform on {y : <y, xc> = rho_tilde} inside the sum-zero
// hyperplane. That subsphere is a copy of S^{d-1}.

#include "permcap/quadrature.hpp"
#include "permcap/swap_combinatorics.hpp"

namespace permcap {

struct SubsphereContext {
  int d = 2;               ///< ambient sphere dimension n - 2
  double rho_tilde = 0.0;  ///< <y, xc>
  double rho_hat = 0.0;    ///< cap height

  SubsphereContext() = default;
  /// Throws DomainError unless d >= 2 and both inner products lie in [-1, 1]
  /// (values within 1e-12 of the boundary are snapped onto it).
  SubsphereContext(int d, double rho_tilde, double rho_hat);
};

/// Which of x1, x2, xc coincide. Passed explicitly because u = -1 and u = 1
/// occur exactly for some swap distances.
enum class EqualityClass {
  all_equal,         ///< x1 = x2 = xc
  first_is_center,   ///< x1 = xc != x2
  second_is_center,  ///< x2 = xc != x1
  pair_equal,        ///< x1 = x2 != xc
  distinct,          ///< pairwise distinct
};

EqualityClass equality_class(const SwapTriple& s);

/// Inner products among x1, x2 and xc. `u3_star` is the inner product of the
/// components of x1 and x2 orthogonal to xc, after normalization; it is only
/// meaningful for distinct points with |u1|, |u2| < 1.
struct PairGeometry {
  double u1 = 1.0;
  double u2 = 1.0;
  double u3 = 1.0;
  double u3_star = 1.0;
  EqualityClass cls = EqualityClass::all_equal;
};

/// Exact geometry for a swap triple: u3* is formed from integer arithmetic so
/// that its degenerate values +-1 are detected without rounding.
PairGeometry pair_geometry(const SwapTriple& s, const GroupSizes& g);

/// P1(u1): Pr(<y, x1> >= rho_hat) where <x1, xc> = u1. When x1 = +-xc or
/// rho_tilde = +-1 the probability is an indicator; inner products within
/// 1e-12 of rho_hat then count as on the (closed) cap boundary.
double single_inclusion(double u1, const SubsphereContext& ctx);

/// P2(u1, u2, u3): Pr(<y, x1> >= rho_hat and <y, x2> >= rho_hat) with
/// u1 = <x1, xc>, u2 = <x2, xc>, u3 = <x1, x2>. Throws DomainError when the u
/// values contradict `cls`, and QuadratureError when the integral fails.
double double_inclusion(double u1, double u2, double u3, EqualityClass cls,
                        const SubsphereContext& ctx,
                        const QuadratureConfig& q = {});
double double_inclusion(const PairGeometry& geo, const SubsphereContext& ctx,
                        const QuadratureConfig& q = {});

/// P1(u1, |rho_hat|) + P1(-u1, |rho_hat|). Exactly 1 at rho_hat = 0, where
/// the sum would count the boundary <y, x1> = 0 twice on indicator branches.
double two_sided_single(double u1, const SubsphereContext& ctx);

/// Sum of P2 over the sign patterns (u1, u2, u3), (-u1, u2, -u3),
/// (u1, -u2, -u3), (-u1, -u2, u3), all at |rho_hat|. Exactly 1 at rho_hat = 0.
double two_sided_double(double u1, double u2, double u3, EqualityClass cls,
                        const SubsphereContext& ctx,
                        const QuadratureConfig& q = {});
double two_sided_double(const PairGeometry& geo, const SubsphereContext& ctx,
                        const QuadratureConfig& q = {});

}  // namespace permcap
