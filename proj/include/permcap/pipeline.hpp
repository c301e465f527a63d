#pragma once

// Gene-set pipeline: composite responses, standardization and per-set
// estimates. Gene sets are processed in parallel; results keep input order.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "permcap/estimators.hpp"
#include "permcap/ingest.hpp"
#include "permcap/report_io.hpp"

namespace permcap {

/// Per-gene standard deviation over all samples, dividing by n.
std::vector<double> gene_standard_deviations(const ExpressionMatrix& matrix);

struct CompositeResponse {
  std::vector<double> values;  ///< sum over used genes of Y_gi / s_g
  std::size_t genes_used = 0;
  std::vector<std::string> absent;         ///< set genes missing from the matrix
  std::vector<std::string> zero_variance;  ///< set genes skipped for s_g = 0
};

/// Throws InputError when no gene of the set is both present and variable.
CompositeResponse composite_response(const ExpressionMatrix& matrix,
                                     std::span<const double> sds, const GeneSet& set);

/// Throws DegenerateInput for a zero-variance response.
StandardizedPair standardize(std::span<const double> response,
                             std::span<const std::uint8_t> labels);

struct PipelineOptions {
  std::vector<Estimator> estimators = {Estimator::p1, Estimator::p2, Estimator::p3};
  Sided sided = Sided::two;
  bool with_rmse = false;
  bool timing = false;
  int threads = 0;  ///< 0 keeps the OpenMP default
  MomentOptions moments;
};

struct EstimatorOutcome {
  Estimator estimator = Estimator::p2;
  MomentReport report;
  std::optional<ChebychevResult> chebychev;  ///< needs the RMSE
  double seconds = 0.0;
};

struct GeneSetResult {
  std::string name;
  std::size_t set_size = 0;
  std::size_t genes_used = 0;
  int m0 = 0;
  int m1 = 0;
  std::optional<double> rho_hat;
  double granularity = 0.0;
  double log10_granularity = 0.0;
  std::vector<EstimatorOutcome> outcomes;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
};

/// One result per gene set in collection order. Failures of a single set
/// (empty intersection, zero-variance response, quadrature) become error
/// results; the rest are unaffected.
std::vector<GeneSetResult> run_estimates(const ExpressionMatrix& matrix,
                                         std::span<const std::uint8_t> labels,
                                         const GeneSetCollection& sets,
                                         const PipelineOptions& opt);

/// Flat report record with a fixed field order determined by `opt`.
Record to_record(const GeneSetResult& r, const PipelineOptions& opt);

}  // namespace permcap
