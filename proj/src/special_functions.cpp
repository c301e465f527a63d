#include "permcap/special_functions.hpp"

#include <cmath>
#include <limits>
#include <math.h>

#include "permcap/errors.hpp"

namespace permcap {

namespace {

constexpr double kCfEps = 1e-16;
constexpr double kCfTiny = 1e-300;
constexpr int kCfMaxIter = 20000;

// Continued fraction for I_x(a, b) (modified Lentz). Converges quickly when
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kCfTiny) d = kCfTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kCfTiny) d = kCfTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kCfTiny) c = kCfTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kCfTiny) d = kCfTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kCfTiny) c = kCfTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kCfEps) return h;
  }
  throw DomainError("incomplete beta continued fraction did not converge");
}

// log of x^a (1-x)^b / (a B(a,b)) * cf, the direct-branch value of I_x(a,b).
double log_direct_branch(double a, double b, double x, double complement) {
  const double cf = beta_continued_fraction(a, b, x);
  return a * std::log(x) + b * std::log(complement) - log_beta(a, b) -
         std::log(a) + std::log(cf);
}

void check_parameters(double a, double b, double x, double complement) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("incomplete beta requires a > 0 and b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0) || !(complement >= 0.0 && complement <= 1.0)) {
    throw DomainError("incomplete beta argument outside [0, 1]");
  }
}

}  // namespace

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double incomplete_beta(double a, double b, double x, double complement) {
  check_parameters(a, b, x, complement);
  if (x == 0.0) return 0.0;
  if (complement == 0.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_direct_branch(a, b, x, complement));
  }
  return 1.0 - std::exp(log_direct_branch(b, a, complement, x));
}

double log_incomplete_beta(double a, double b, double x, double complement) {
  check_parameters(a, b, x, complement);
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (complement == 0.0) return 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return log_direct_branch(a, b, x, complement);
  }
  return std::log1p(-std::exp(log_direct_branch(b, a, complement, x)));
}

}  // namespace permcap
