#pragma once

// RMSE and CV of p1 and p2 along a grid of correlations with rho_tilde =
// rho_hat = rho, for balanced designs m0 = m1 = m.

#include <string>
#include <vector>

#include "permcap/estimators.hpp"
#include "permcap/report_io.hpp"

namespace permcap {

struct SweepConfig {
  std::vector<int> m_values = {20, 70};
  std::vector<double> rho_grid;  ///< empty selects default_rho_grid()
  Sided sided = Sided::one;
  MomentOptions moments;
};

/// 0 to 0.5 by 0.1, 0.55 to 0.75 by 0.05, then 0.76 to 0.99 by 0.01.
std::vector<double> default_rho_grid();

struct SweepRow {
  int m = 0;
  double rho = 0.0;
  double granularity = 0.0;
  double p1 = 0.0;
  double log10_p1 = 0.0;
  double p2 = 0.0;
  double log10_p2 = 0.0;
  double rmse1_p1 = 0.0;  ///< under reference 1
  double rmse2_p1 = 0.0;  ///< under reference 2
  double rmse2_p2 = 0.0;
  double cv_p2 = 0.0;
  bool variance_clamped = false;
};

std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

struct PropertyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SweepCriteria {
  double cv_limit = 5.0;
  /// CV is held to cv_limit where p1 is at least this value.
  double cv_min_p1 = 2e-30;
};

/// Shape properties of each design's curve: p2 floor and collapse to 1/N,
/// RMSE2(p2) reaching 0, the RMSE2(p1) plateau, monotone estimates and the
/// CV bound. Rows must be grouped by m with rho increasing.
std::vector<PropertyCheck> check_sweep(const std::vector<SweepRow>& rows, Sided sided,
                                       const SweepCriteria& criteria = {});

Record to_record(const SweepRow& row);

}  // namespace permcap
