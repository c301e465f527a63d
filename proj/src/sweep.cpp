#include "permcap/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "permcap/errors.hpp"
#include "permcap/sphere_geometry.hpp"

namespace permcap {

namespace {

constexpr double kLn10 = 2.302585092994045684;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

}  // namespace

std::vector<double> default_rho_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 5; ++i) grid.push_back(i / 10.0);
  for (int i = 11; i <= 15; ++i) grid.push_back(i / 20.0);
  for (int i = 76; i <= 99; ++i) grid.push_back(i / 100.0);
  return grid;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  const std::vector<double> grid = cfg.rho_grid.empty() ? default_rho_grid() : cfg.rho_grid;
  for (double rho : grid) {
    if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("rho grid values must lie in [-1, 1]");
  }
  std::vector<SweepRow> rows;
  for (int m : cfg.m_values) {
    const GroupSizes g(m, m);
    const int d = g.dimension();
    const OrbitSize n = orbit_size(g);
    const double gran = n.exact ? 1.0 / static_cast<double>(*n.exact) : std::exp(-n.log_n);
    const double upper = cfg.sided == Sided::one ? 1.0 : 2.0;
    for (double rho : grid) {
      SweepRow row;
      row.m = m;
      row.rho = rho;
      row.granularity = gran;
      row.p1 = p_hat1_estimate(d, rho, cfg.sided);
      const double h = cfg.sided == Sided::one ? rho : std::fabs(rho);
      row.log10_p1 = (log_cap_volume(d, h) + (cfg.sided == Sided::two ? std::log(2.0) : 0.0)) / kLn10;
      const double mean = tilde_p_c(g, d, rho, rho, cfg.sided);
      const double second = second_moment_ref2(g, d, rho, rho, cfg.sided, cfg.moments);
      row.p2 = std::clamp(mean, gran, upper);
      row.log10_p2 = std::log10(row.p2);
      const double var2 = second - row.p2 * row.p2;
      row.variance_clamped = var2 < -1e-10 * row.p2 * row.p2;
      row.rmse2_p2 = std::sqrt(std::max(0.0, var2));
      row.cv_p2 = row.rmse2_p2 == 0.0 ? 0.0 : row.rmse2_p2 / row.p2;
      row.rmse2_p1 = std::sqrt(std::max(0.0, mse_under_ref2(row.p1, mean, second)));
      row.rmse1_p1 = std::sqrt(std::max(0.0, var_ref1(g, rho, cfg.sided, cfg.moments.quadrature)));
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<PropertyCheck> check_sweep(const std::vector<SweepRow>& rows, Sided sided,
                                       const SweepCriteria& criteria) {
  std::map<int, std::vector<SweepRow>> by_m;
  for (const SweepRow& r : rows) by_m[r.m].push_back(r);
  std::vector<PropertyCheck> out;
  for (const auto& [m, curve] : by_m) {
    const std::string tag = "m=" + std::to_string(m) + " ";
    const SweepRow& last = curve.back();
    const double gran = last.granularity;

    if (sided == Sided::one) {
      bool floor_ok = true;
      for (const SweepRow& r : curve) floor_ok &= r.p2 >= gran;
      out.push_back({tag + "p2 >= 1/N at every rho", floor_ok, fmt("1/N = %.6g", gran)});
    }
    out.push_back({tag + "p2 reaches 1/N with zero RMSE at the top of the grid",
                   last.p2 <= gran * (1.0 + 1e-9) && last.rmse2_p2 <= 1e-6 * gran,
                   fmt("rho = %.4g: p2 = %.6g, RMSE2(p2) = %.3g", last.rho, last.p2,
                       last.rmse2_p2)});

    bool p1_mono = true, p2_mono = true;
    for (std::size_t i = 1; i < curve.size(); ++i) {
      if (curve[i].rho < curve[i - 1].rho) continue;
      p1_mono &= curve[i].p1 <= curve[i - 1].p1;
      p2_mono &= curve[i].p2 <= curve[i - 1].p2 * (1.0 + 1e-12);
    }
    out.push_back({tag + "p1 and p2 non-increasing in rho", p1_mono && p2_mono, ""});

    // With p2 = 1/N and zero variance, RMSE2(p1) = 1/N - p1 once p1 << 1/N.
    bool plateau = false;
    std::string plateau_detail = "fewer than two grid points";
    if (curve.size() >= 2) {
      const SweepRow& prev = curve[curve.size() - 2];
      const double ratio = last.rmse2_p1 / prev.rmse2_p1;
      plateau = last.rmse2_p1 >= 0.5 * gran && last.rmse2_p1 <= gran * (1.0 + 1e-9) &&
                last.rmse2_p1 >= 10.0 * last.p1 && ratio >= 0.5 && ratio <= 2.0;
      plateau_detail = fmt("RMSE2(p1) = %.4g at p1 = %.3g; ratio to previous point %.3g",
                           last.rmse2_p1, last.p1, ratio);
    }
    out.push_back({tag + "RMSE2(p1) plateaus near 1/N as p1 -> 0", plateau, plateau_detail});

    double max_in = 0.0, max_all = 0.0, p1_at_max_all = 1.0;
    for (const SweepRow& r : curve) {
      if (r.p1 >= criteria.cv_min_p1) max_in = std::max(max_in, r.cv_p2);
      if (r.cv_p2 > max_all) {
        max_all = r.cv_p2;
        p1_at_max_all = r.p1;
      }
    }
    out.push_back({tag + fmt("CV(p2) < %g where p1 >= %g", criteria.cv_limit, criteria.cv_min_p1),
                   max_in < criteria.cv_limit,
                   fmt("max CV %.4g; over the whole grid %.4g at p1 = %.3g", max_in, max_all,
                       p1_at_max_all)});

    for (const SweepRow& r : curve) {
      if (r.rho == 0.0 && sided == Sided::one) {
        out.push_back({tag + "p1 = 0.5 at rho = 0", std::fabs(r.p1 - 0.5) <= 1e-15, ""});
      }
    }
  }
  return out;
}

Record to_record(const SweepRow& r) {
  return {{"m", static_cast<std::int64_t>(r.m)},
          {"rho", number(r.rho)},
          {"granularity", number(r.granularity)},
          {"p1", number(r.p1)},
          {"log10_p1", number(r.log10_p1)},
          {"p2", number(r.p2)},
          {"log10_p2", number(r.log10_p2)},
          {"rmse1_p1", number(r.rmse1_p1)},
          {"rmse2_p1", number(r.rmse2_p1)},
          {"rmse2_p2", number(r.rmse2_p2)},
          {"cv_p2", number(r.cv_p2)},
          {"variance_clamped", r.variance_clamped}};
}

}  // namespace permcap
