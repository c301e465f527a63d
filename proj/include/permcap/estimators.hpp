#pragma once

// Closed-form approximations p1, p2, p3 to a two-sample permutation p-value
// and their moments under the two reference distributions:
//   reference 1: y uniform on S^d;
//   reference 2: y uniform on {y in S^d : <y, xc> = rho_tilde}.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "permcap/quadrature.hpp"
#include "permcap/swap_combinatorics.hpp"

namespace permcap {

enum class Sided { one, two };
enum class Estimator { p1, p2, p3 };

std::string_view to_string(Sided s);
std::string_view to_string(Estimator e);

/// Centered, unit-norm label and response vectors.
struct StandardizedPair {
  std::vector<std::uint8_t> labels;  ///< 1 for cases (m1 of them), 0 for controls
  std::vector<double> x0;
  std::vector<double> y0;
  GroupSizes g;
  int d = 0;
  double rho_hat = 0.0;

  /// Builds the pair from raw labels and response. Throws DegenerateInput
  /// when the response has zero variance and DomainError for invalid labels.
  static StandardizedPair from_raw(std::span<const std::uint8_t> labels,
                                   std::span<const double> response);
};

/// Standardized label vector: -sqrt(m1/(n m0)) for controls and
/// +sqrt(m0/(n m1)) for cases.
std::vector<double> standardized_labels(std::span<const std::uint8_t> labels);

struct ConditioningPoint {
  std::vector<std::uint8_t> labels;
  std::vector<double> xc;
  double rho_tilde = 0.0;
  int swap_distance = 0;  ///< swap distance between xc and x0
};

/// p1 and p2 condition on x0 itself. One-sided p3 puts the case labels on the
/// m1 largest coordinates of y0 (ties go to the lower index); two-sided p3
/// also tries the m1 smallest coordinates and keeps whichever gives the larger
/// |<xc, y0>|. The returned rho_tilde is never below rho_hat (one-sided) or
/// |rho_hat| in magnitude (two-sided), since x0 itself is a candidate.
ConditioningPoint choose_conditioning_point(const StandardizedPair& sp,
                                            Estimator estimator, Sided sided);

/// Options for moment evaluation.
struct MomentOptions {
  QuadratureConfig quadrature;
  /// Double-inclusion cells whose summed upper bounds stay below this
  /// fraction of the exactly known part of the second moment are skipped.
  /// Zero evaluates every cell.
  double prune_rel_tol = 1e-13;
};

/// p1: cap volume sigma_d(C(rho_hat)); two-sided 2 sigma_d(C(|rho_hat|)).
double p_hat1_estimate(int d, double rho_hat, Sided sided);

/// Variance of p(y, t) for y uniform on S^d:
/// (1/N) sum_r C(m0,r) C(m1,r) V2(u(r); t, d) - p1(t)^2.
double var_ref1(const GroupSizes& g, double t, Sided sided,
                const QuadratureConfig& q = {});

/// Mean of p(y, rho_hat) under reference 2:
/// (1/N) sum_r C(m0,r) C(m1,r) P1(u(r), rho_tilde, rho_hat).
double tilde_p_c(const GroupSizes& g, int d, double rho_tilde, double rho_hat,
                 Sided sided);

/// Second moment of p(y, rho_hat) under reference 2, summed over the pair
/// census. Evaluated in parallel over unique swap triples; the reduction order
/// is fixed so results do not depend on the thread count.
double second_moment_ref2(const GroupSizes& g, int d, double rho_tilde,
                          double rho_hat, Sided sided,
                          const MomentOptions& opt = {});

/// E2[(p - estimate)^2] given the reference-2 mean and second moment.
double mse_under_ref2(double estimate, double mean, double second_moment);

struct MomentReport {
  Estimator estimator = Estimator::p2;
  Sided sided = Sided::two;
  double estimate = 0.0;
  double log10_estimate = 0.0;
  double granularity = 0.0;  ///< 1/N
  double log10_granularity = 0.0;
  double rho_hat = 0.0;
  double rho_tilde = 0.0;
  int conditioning_distance = 0;

  bool has_moments = false;
  /// p1: moments under reference 1; p2, p3: under reference 2.
  double second_moment = 0.0;
  double variance = 0.0;
  double rmse = 0.0;
  double cv = 0.0;
  bool variance_clamped = false;  ///< second_moment - estimate^2 was materially negative
  /// p1 only: RMSE of p1 as a predictor of p under reference 2 with xc = x0.
  std::optional<double> rmse_ref2;
};

struct ReportOptions {
  bool with_moments = true;
  MomentOptions moments;
};

MomentReport report(const StandardizedPair& sp, Estimator estimator, Sided sided,
                    const ReportOptions& opt = {});

struct ChebychevResult {
  double p_star = 0.0;       ///< mu + lambda sigma + 1/(1 + lambda^2) at the optimal lambda
  double lambda = 0.0;       ///< optimal lambda (+inf when sigma = 0)
  double closed_form = 0.0;  ///< mu + (2^{1/3} + 2^{-2/3}) sigma^{2/3}
};

/// Conservative p-value from the one-sided Chebychev (Cantelli) inequality.
ChebychevResult chebychev_bound(double mu, double sigma);

/// (p_true - estimate) / rmse. With rmse = 0 the score is 0 when the two
/// agree to within a few ulps and +-inf otherwise.
double z_score(double p_true, double estimate, double rmse);

namespace reference {

/// Serial evaluation of the second moment directly over the census, one
/// double-inclusion call per ordered cell and no pruning.
double second_moment_ref2(const GroupSizes& g, int d, double rho_tilde,
                          double rho_hat, Sided sided,
                          const QuadratureConfig& q = {});

/// Serial evaluation of var_ref1.
double var_ref1(const GroupSizes& g, double t, Sided sided,
                const QuadratureConfig& q = {});

}  // namespace reference

}  // namespace permcap
