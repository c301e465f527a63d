#pragma once

#include <cmath>

namespace permcap {

/// log Γ(x) for x > 0. Reentrant (does not touch the global signgam).
double log_gamma(double x);

/// log B(a, b).
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b).
///
/// `complement` must equal 1 - x; callers that can form it without
/// cancellation (for example t^2 when x = 1 - t^2) should pass it explicitly.
/// Evaluated by Lentz's continued fraction on whichever of (x; a, b) or
/// (1 - x; b, a) converges faster, with the prefactor assembled in log space
/// so results far below 1e-300 relative to the prefactor do not underflow
/// prematurely.
double incomplete_beta(double a, double b, double x, double complement);

inline double incomplete_beta(double a, double b, double x) {
  return incomplete_beta(a, b, x, 1.0 - x);
}

/// log I_x(a, b); -inf when the value is exactly zero.
double log_incomplete_beta(double a, double b, double x, double complement);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace permcap
