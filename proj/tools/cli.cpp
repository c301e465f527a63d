#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "permcap/errors.hpp"
#include "permcap/ingest.hpp"
#include "permcap/pipeline.hpp"
#include "permcap/report_io.hpp"
#include "permcap/simulation.hpp"
#include "permcap/sweep.hpp"
#include "permcap/validation.hpp"

namespace permcap::cli {

namespace {

struct Common {
  int threads = 0;
  double quad_rel_tol = QuadratureConfig{}.rel_tol;
  double quad_abs_tol = QuadratureConfig{}.abs_tol;
  std::string format = "json";
  std::string out;
};

double env_double(const char* name, double fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (*end != '\0') throw InputError(std::string(name) + " is not a number: " + raw);
  return v;
}

int env_int(const char* name, int fallback) {
  const double v = env_double(name, fallback);
  if (v != std::floor(v) || v < 0 || v > 4096) {
    throw InputError(std::string(name) + " must be a non-negative integer");
  }
  return static_cast<int>(v);
}

Common common_from_env() {
  Common c;
  c.threads = env_int("PERMCAP_THREADS", c.threads);
  c.quad_rel_tol = env_double("PERMCAP_QUAD_REL_TOL", c.quad_rel_tol);
  c.quad_abs_tol = env_double("PERMCAP_QUAD_ABS_TOL", c.quad_abs_tol);
  return c;
}

void add_common(CLI::App* app, Common& c, bool with_format = true) {
  app->add_option("--threads", c.threads, "Worker threads (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--quad-rel-tol", c.quad_rel_tol, "Quadrature relative tolerance");
  app->add_option("--quad-abs-tol", c.quad_abs_tol, "Quadrature absolute tolerance");
  if (with_format) {
    app->add_option("--format", c.format, "Report format")
        ->check(CLI::IsMember({"json", "jsonl", "csv"}));
  }
  app->add_option("--out", c.out, "Report path (default: standard output)");
}

QuadratureConfig quadrature(const Common& c) {
  QuadratureConfig q;
  q.rel_tol = c.quad_rel_tol;
  q.abs_tol = c.quad_abs_tol;
  try {
    q.validate();
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
  return q;
}

Sided parse_sided(const std::string& s) {
  if (s == "one") return Sided::one;
  if (s == "two") return Sided::two;
  throw InputError("--sided must be one or two");
}

Estimator parse_estimator(const std::string& s) {
  if (s == "p1") return Estimator::p1;
  if (s == "p2") return Estimator::p2;
  if (s == "p3") return Estimator::p3;
  throw InputError("unknown estimator '" + s + "' (expected p1, p2 or p3)");
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw InputError(what + ": '" + s + "' is not a number");
  return v;
}

// Comma-separated values, each a number or a range a..b[:step].
std::vector<double> parse_grid(const std::string& spec, const std::string& what,
                               std::optional<double> default_step) {
  std::vector<double> grid;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      grid.push_back(parse_number(item, what));
      continue;
    }
    const auto colon = item.find(':', dots);
    const double lo = parse_number(item.substr(0, dots), what);
    const double hi = parse_number(
        item.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2),
        what);
    std::optional<double> step = default_step;
    if (colon != std::string::npos) step = parse_number(item.substr(colon + 1), what);
    if (!step) throw InputError(what + ": range '" + item + "' needs a :step");
    if (!(*step > 0.0) || hi < lo) throw InputError(what + ": bad range '" + item + "'");
    const long count = std::lround(std::floor((hi - lo) / *step + 1e-9)) + 1;
    if (count > 100000) throw InputError(what + ": range '" + item + "' is too long");
    for (long i = 0; i < count; ++i) grid.push_back(lo + static_cast<double>(i) * *step);
  }
  if (grid.empty()) throw InputError(what + " is empty");
  return grid;
}

std::vector<int> parse_int_grid(const std::string& spec, const std::string& what) {
  std::vector<int> out;
  for (double v : parse_grid(spec, what, 1.0)) {
    if (v != std::floor(v) || v < 1 || v > 100000) {
      throw InputError(what + ": values must be positive integers");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void emit(const std::vector<Record>& records, const Common& c, std::ostream& out) {
  const ReportFormat f = parse_format(c.format);
  if (c.out.empty()) {
    write_records(out, records, f);
    out.flush();
    return;
  }
  std::ofstream file(c.out, std::ios::binary);
  if (!file) throw InputError("cannot open " + c.out + " for writing");
  write_records(file, records, f);
  if (!file.flush()) throw InputError("failed writing " + c.out);
}

class ThreadScope {
 public:
  explicit ThreadScope(int threads) : saved_(omp_get_max_threads()) {
    if (threads > 0) omp_set_num_threads(threads);
  }
  ~ThreadScope() { omp_set_num_threads(saved_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int saved_;
};

void error_record(std::ostream& err, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
  err.flush();
}

struct EstimateArgs {
  std::string matrix;
  std::string labels;
  std::string genesets;
  std::vector<std::string> estimators = {"p1", "p2", "p3"};
  std::string sided = "two";
  bool with_rmse = false;
  bool timing = false;
  double prune_rel_tol = MomentOptions{}.prune_rel_tol;
};

int run_estimate(const EstimateArgs& a, const Common& c, std::ostream& out) {
  PipelineOptions opt;
  opt.estimators.clear();
  for (const std::string& e : a.estimators) {
    const Estimator est = parse_estimator(e);
    if (std::find(opt.estimators.begin(), opt.estimators.end(), est) != opt.estimators.end()) {
      throw InputError("estimator " + e + " listed twice");
    }
    opt.estimators.push_back(est);
  }
  opt.sided = parse_sided(a.sided);
  opt.with_rmse = a.with_rmse;
  opt.timing = a.timing;
  opt.threads = c.threads;
  opt.moments.quadrature = quadrature(c);
  if (!(a.prune_rel_tol >= 0.0)) throw InputError("--prune-rel-tol must be >= 0");
  opt.moments.prune_rel_tol = a.prune_rel_tol;

  const ExpressionMatrix matrix = read_matrix_tsv(a.matrix);
  const LabelVector labels = read_labels_csv(a.labels);
  const GeneSetCollection sets = read_gmt(a.genesets);
  const std::vector<std::uint8_t> aligned = align_labels(labels, matrix);

  const std::vector<GeneSetResult> results = run_estimates(matrix, aligned, sets, opt);
  std::vector<Record> records;
  records.reserve(results.size());
  for (const GeneSetResult& r : results) records.push_back(to_record(r, opt));
  emit(records, c, out);
  return kExitOk;
}

struct ValidateArgs {
  int m0 = 3;
  int m1 = 3;
  std::uint64_t draws = 100'000;
  std::uint64_t seed = 1;
  std::string grid = "-0.3,0.2,0.5";
  double k_se = 4.0;
};

int run_validate(const ValidateArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  ValidationConfig cfg;
  cfg.m0 = a.m0;
  cfg.m1 = a.m1;
  cfg.draws = a.draws;
  cfg.seed = a.seed;
  cfg.grid = parse_grid(a.grid, "--grid", std::nullopt);
  for (double v : cfg.grid) {
    if (!(v > -1.0 && v < 1.0)) throw InputError("--grid values must lie in (-1, 1)");
  }
  if (!(a.k_se > 0.0)) throw InputError("--k-se must be positive");
  if (a.m0 < 1 || a.m1 < 1) throw InputError("--m0 and --m1 must be positive");
  if (a.draws < 2) throw InputError("--draws must be at least 2");
  cfg.k_se = a.k_se;
  cfg.quadrature = quadrature(c);

  const ValidationReport rep = run_validation(cfg);
  std::vector<Record> records;
  std::size_t failed = 0;
  for (const CheckResult& r : rep.checks) {
    failed += !r.pass;
    records.push_back({{"suite", r.suite},
                       {"name", r.name},
                       {"predicted", number(r.predicted)},
                       {"observed", number(r.observed)},
                       {"se", number(r.se)},
                       {"margin", number(r.margin)},
                       {"pass", r.pass}});
  }
  emit(records, c, out);
  for (const std::string& n : rep.notes) err << "note: " << n << '\n';
  err << "validate: " << rep.checks.size() << " checks, " << failed << " failed\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

struct SweepArgs {
  std::string m_grid = "20,70";
  std::string rho_grid;
  std::string sided = "two";
  bool check = false;
  double cv_limit = SweepCriteria{}.cv_limit;
  double cv_min_p1 = SweepCriteria{}.cv_min_p1;
};

int run_sweep_command(const SweepArgs& a, const Common& c, std::ostream& out,
                      std::ostream& err) {
  SweepConfig cfg;
  cfg.m_values = parse_int_grid(a.m_grid, "--m-grid");
  if (!a.rho_grid.empty()) cfg.rho_grid = parse_grid(a.rho_grid, "--rho-grid", std::nullopt);
  for (double v : cfg.rho_grid) {
    if (!(v >= -1.0 && v <= 1.0)) throw InputError("--rho-grid values must lie in [-1, 1]");
  }
  cfg.sided = parse_sided(a.sided);
  cfg.moments.quadrature = quadrature(c);

  const std::vector<SweepRow> rows = run_sweep(cfg);
  std::vector<Record> records;
  records.reserve(rows.size());
  for (const SweepRow& r : rows) records.push_back(to_record(r));
  emit(records, c, out);
  if (!a.check) return kExitOk;

  SweepCriteria crit;
  crit.cv_limit = a.cv_limit;
  crit.cv_min_p1 = a.cv_min_p1;
  bool ok = true;
  for (const PropertyCheck& p : check_sweep(rows, cfg.sided, crit)) {
    ok &= p.pass;
    err << (p.pass ? "PASS " : "FAIL ") << p.name;
    if (!p.detail.empty()) err << ": " << p.detail;
    err << '\n';
  }
  return ok ? kExitOk : kExitFailure;
}

struct SimArgs {
  std::string dist = "normal";
  std::optional<double> shift;
  int m0 = 10;
  int m1 = 10;
  int reps = 500;
  std::uint64_t seed = 1;
  std::string sided = "two";
  bool replicates = false;
};

int run_bench_sim(const SimArgs& a, const Common& c, std::ostream& out) {
  SimulationConfig cfg;
  cfg.dist = parse_distribution(a.dist);
  cfg.shift = a.shift;
  if (a.m0 < 1 || a.m1 < 1) throw InputError("--m0 and --m1 must be positive");
  if (a.reps < 1) throw InputError("--reps must be positive");
  cfg.m0 = a.m0;
  cfg.m1 = a.m1;
  cfg.reps = a.reps;
  cfg.seed = a.seed;
  cfg.sided = parse_sided(a.sided);
  cfg.threads = c.threads;
  cfg.moments.quadrature = quadrature(c);

  const SimulationResult res = run_simulation(cfg);
  std::vector<Record> records;
  if (a.replicates) {
    for (const Replicate& r : res.replicates) records.push_back(to_record(r));
  } else {
    records = to_records(res, cfg);
  }
  emit(records, c, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-form approximations to permutation p-values"};
  app.name("permcap");
  app.require_subcommand(1);

  Common common;
  try {
    common = common_from_env();
  } catch (const InputError& e) {
    error_record(err, "input_error", e.what());
    return kExitInput;
  }

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand("run-estimate", "Estimate p-values for gene sets");
  estimate->add_option("--matrix", est.matrix, "Expression matrix (TSV)")->required();
  estimate->add_option("--labels", est.labels, "Sample labels (CSV)")->required();
  estimate->add_option("--genesets", est.genesets, "Gene sets (GMT)")->required();
  estimate->add_option("--estimators", est.estimators, "Comma-separated subset of p1,p2,p3")
      ->delimiter(',');
  estimate->add_option("--sided", est.sided, "one or two")
      ->check(CLI::IsMember({"one", "two"}));
  estimate->add_flag("--with-rmse", est.with_rmse, "Add RMSE, CV and Chebychev fields");
  estimate->add_flag("--timing", est.timing, "Add per-estimator wall time");
  estimate->add_option("--prune-rel-tol", est.prune_rel_tol,
                       "Relative bound below which second-moment cells are skipped");
  add_common(estimate, common);

  ValidateArgs val;
  CLI::App* validate = app.add_subcommand("validate", "Compare formulas with Monte Carlo oracles");
  validate->add_option("--m0", val.m0, "Controls");
  validate->add_option("--m1", val.m1, "Cases");
  validate->add_option("--draws", val.draws, "Monte Carlo draws per check");
  validate->add_option("--seed", val.seed, "Master seed");
  validate->add_option("--grid", val.grid, "Cap heights and rho_tilde values, comma-separated");
  validate->add_option("--k-se", val.k_se, "Allowed standard errors");
  add_common(validate, common);

  SweepArgs sw;
  CLI::App* sweep = app.add_subcommand("sweep", "RMSE and CV curves over rho for m0 = m1 = m");
  sweep->add_option("--m-grid", sw.m_grid, "Group sizes: list or range a..b[:step]");
  sweep->add_option("--rho-grid", sw.rho_grid, "Correlations: list or range a..b:step");
  sweep->add_option("--sided", sw.sided, "one or two")->check(CLI::IsMember({"one", "two"}));
  sweep->add_flag("--check", sw.check, "Check curve properties; exit 1 on failure");
  sweep->add_option("--cv-limit", sw.cv_limit, "CV bound for --check");
  sweep->add_option("--cv-min-p1", sw.cv_min_p1, "Smallest p1 held to the CV bound");
  add_common(sweep, common);

  SimArgs sim;
  CLI::App* bench = app.add_subcommand("bench-sim", "Shift simulation against exact p-values");
  bench->add_option("--dist", sim.dist, "exp, t5, normal or uniform")
      ->check(CLI::IsMember({"exp", "t5", "normal", "uniform"}));
  bench->add_option("--shift", sim.shift,
                    "Location shift of the cases (default: two standard deviations)");
  bench->add_option("--m0", sim.m0, "Controls");
  bench->add_option("--m1", sim.m1, "Cases");
  bench->add_option("--reps", sim.reps, "Replicates");
  bench->add_option("--seed", sim.seed, "Master seed");
  bench->add_option("--sided", sim.sided, "one or two")->check(CLI::IsMember({"one", "two"}));
  bench->add_flag("--replicates", sim.replicates, "Emit one record per replicate");
  add_common(bench, common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_record(err, "usage_error", e.what());
    return kExitInput;
  }

  try {
    const ThreadScope scope(common.threads);
    if (estimate->parsed()) return run_estimate(est, common, out);
    if (validate->parsed()) return run_validate(val, common, out, err);
    if (sweep->parsed()) return run_sweep_command(sw, common, out, err);
    return run_bench_sim(sim, common, out);
  } catch (const InputError& e) {
    error_record(err, "input_error", e.what());
    return kExitInput;
  } catch (const DomainError& e) {
    error_record(err, "domain_error", e.what());
    return kExitInput;
  } catch (const OrbitTooLarge& e) {
    error_record(err, "orbit_too_large", e.what());
    return kExitInput;
  } catch (const DegenerateInput& e) {
    error_record(err, "degenerate_input", e.what());
    return kExitInput;
  } catch (const QuadratureError& e) {
    error_record(err, "quadrature_error", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    error_record(err, "error", e.what());
    return kExitFailure;
  }
}

}  // namespace permcap::cli
