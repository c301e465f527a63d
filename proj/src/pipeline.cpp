#include "permcap/pipeline.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <unordered_map>

#include "permcap/errors.hpp"
#include "permcap/special_functions.hpp"

namespace permcap {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::unordered_map<std::string, std::size_t> gene_index(const ExpressionMatrix& matrix) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(matrix.gene_count());
  for (std::size_t g = 0; g < matrix.gene_count(); ++g) index.emplace(matrix.genes[g], g);
  return index;
}

CompositeResponse composite_indexed(const ExpressionMatrix& matrix, std::span<const double> sds,
                                    const std::unordered_map<std::string, std::size_t>& index,
                                    const GeneSet& set) {
  if (sds.size() != matrix.gene_count()) {
    throw DomainError("standard deviations do not match the matrix rows");
  }
  CompositeResponse out;
  out.values.assign(matrix.sample_count(), 0.0);
  std::size_t present = 0;
  for (const std::string& gene : set.genes) {
    const auto it = index.find(gene);
    if (it == index.end()) {
      out.absent.push_back(gene);
      continue;
    }
    ++present;
    const std::size_t g = it->second;
    // A row whose spread is at rounding level of its magnitude is constant.
    double scale = 0.0;
    for (double v : matrix.row(g)) scale = std::max(scale, std::fabs(v));
    if (!(sds[g] > 1e-13 * scale)) {
      out.zero_variance.push_back(gene);
      continue;
    }
    const auto row = matrix.row(g);
    for (std::size_t i = 0; i < row.size(); ++i) out.values[i] += row[i] / sds[g];
    ++out.genes_used;
  }
  if (present == 0) {
    throw InputError("gene set '" + set.name + "' has no genes in the matrix");
  }
  if (out.genes_used == 0) {
    throw DegenerateInput("gene set '" + set.name + "' has only zero-variance genes");
  }
  return out;
}

EstimatorOutcome evaluate(const StandardizedPair& sp, Estimator e, const PipelineOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  EstimatorOutcome out;
  out.estimator = e;
  ReportOptions ro;
  ro.with_moments = opt.with_rmse;
  ro.moments = opt.moments;
  out.report = report(sp, e, opt.sided, ro);
  if (opt.with_rmse) out.chebychev = chebychev_bound(out.report.estimate, out.report.rmse);
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

GeneSetResult process(const ExpressionMatrix& matrix, std::span<const double> sds,
                      const std::unordered_map<std::string, std::size_t>& index,
                      std::span<const std::uint8_t> labels, const GeneSet& set,
                      const PipelineOptions& opt) {
  GeneSetResult r;
  r.name = set.name;
  r.set_size = set.genes.size();
  int m1 = 0;
  for (auto v : labels) m1 += v;
  r.m1 = m1;
  r.m0 = static_cast<int>(labels.size()) - m1;
  try {
    const GroupSizes g(r.m0, r.m1);
    const double log_n = log_orbit_size(g);
    const auto exact = orbit_size(g).exact;
    r.granularity = exact ? 1.0 / static_cast<double>(*exact) : std::exp(-log_n);
    r.log10_granularity = -log_n / std::log(10.0);
    const CompositeResponse resp = composite_indexed(matrix, sds, index, set);
    r.genes_used = resp.genes_used;
    for (const auto& gname : resp.zero_variance) {
      r.warnings.push_back("zero-variance gene skipped: " + gname);
    }
    if (!resp.absent.empty()) {
      r.warnings.push_back(std::to_string(resp.absent.size()) + " genes absent from matrix");
    }
    const StandardizedPair sp = standardize(resp.values, labels);
    r.rho_hat = sp.rho_hat;
    for (Estimator e : opt.estimators) r.outcomes.push_back(evaluate(sp, e, opt));
  } catch (const std::exception& e) {
    r.outcomes.clear();
    r.error = e.what();
  }
  return r;
}

}  // namespace

std::vector<double> gene_standard_deviations(const ExpressionMatrix& matrix) {
  std::vector<double> out(matrix.gene_count());
  const double n = static_cast<double>(matrix.sample_count());
  for (std::size_t g = 0; g < matrix.gene_count(); ++g) {
    const auto row = matrix.row(g);
    CompensatedSum sum;
    for (double v : row) sum.add(v);
    const double mean = sum.value() / n;
    CompensatedSum ss;
    for (double v : row) ss.add((v - mean) * (v - mean));
    out[g] = std::sqrt(ss.value() / n);
  }
  return out;
}

CompositeResponse composite_response(const ExpressionMatrix& matrix,
                                     std::span<const double> sds, const GeneSet& set) {
  return composite_indexed(matrix, sds, gene_index(matrix), set);
}

StandardizedPair standardize(std::span<const double> response,
                             std::span<const std::uint8_t> labels) {
  return StandardizedPair::from_raw(labels, response);
}

std::vector<GeneSetResult> run_estimates(const ExpressionMatrix& matrix,
                                         std::span<const std::uint8_t> labels,
                                         const GeneSetCollection& sets,
                                         const PipelineOptions& opt) {
  if (labels.size() != matrix.sample_count()) {
    throw InputError("label count differs from the matrix sample count");
  }
  if (opt.estimators.empty()) throw DomainError("no estimators requested");
  opt.moments.quadrature.validate();
  const std::vector<double> sds = gene_standard_deviations(matrix);
  const auto index = gene_index(matrix);
  std::vector<GeneSetResult> results(sets.sets.size());
  const long count = static_cast<long>(sets.sets.size());
  const int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long i = 0; i < count; ++i) {
    results[i] = process(matrix, sds, index, labels, sets.sets[i], opt);
  }
  return results;
}

Record to_record(const GeneSetResult& r, const PipelineOptions& opt) {
  Record rec;
  auto put = [&](std::string key, FieldValue v) { rec.push_back({std::move(key), std::move(v)}); };
  auto opt_number = [](const std::optional<double>& v) {
    return v ? number(*v) : FieldValue(std::monostate{});
  };
  put("name", r.name);
  put("set_size", static_cast<std::int64_t>(r.set_size));
  put("genes_used", static_cast<std::int64_t>(r.genes_used));
  put("m0", static_cast<std::int64_t>(r.m0));
  put("m1", static_cast<std::int64_t>(r.m1));
  put("sided", std::string(to_string(opt.sided)));
  put("rho_hat", opt_number(r.rho_hat));
  put("granularity", number(r.granularity));
  put("log10_granularity", number(r.log10_granularity));
  for (std::size_t k = 0; k < opt.estimators.size(); ++k) {
    const std::string p(to_string(opt.estimators[k]));
    const EstimatorOutcome* o = k < r.outcomes.size() ? &r.outcomes[k] : nullptr;
    auto value = [&](auto get) -> FieldValue {
      return o ? get(*o) : FieldValue(std::monostate{});
    };
    put(p + "_estimate", value([](const auto& x) { return number(x.report.estimate); }));
    put(p + "_log10_estimate",
        value([](const auto& x) { return number(x.report.log10_estimate); }));
    put(p + "_rho_tilde", value([](const auto& x) { return number(x.report.rho_tilde); }));
    if (opt.with_rmse) {
      put(p + "_rmse", value([](const auto& x) { return number(x.report.rmse); }));
      put(p + "_cv", value([](const auto& x) { return number(x.report.cv); }));
      if (opt.estimators[k] == Estimator::p1) {
        put(p + "_rmse_ref2", value([](const auto& x) {
              return x.report.rmse_ref2 ? number(*x.report.rmse_ref2)
                                        : FieldValue(std::monostate{});
            }));
      }
      put(p + "_variance_clamped",
          value([](const auto& x) { return FieldValue(x.report.variance_clamped); }));
      put(p + "_chebychev",
          value([](const auto& x) { return number(x.chebychev->p_star); }));
    }
    if (opt.timing) put(p + "_seconds", value([](const auto& x) { return number(x.seconds); }));
  }
  put("warnings", join(r.warnings, "; "));
  put("error", r.error ? FieldValue(*r.error) : FieldValue(std::monostate{}));
  return rec;
}

}  // namespace permcap
