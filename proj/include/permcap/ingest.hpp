#pragma once

// Readers for the gene-set pipeline inputs: a TSV expression matrix (header of
// sample ids, first column gene ids), a two-column CSV of sample labels and a
// GMT gene-set collection.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace permcap {

struct ExpressionMatrix {
  std::vector<std::string> genes;
  std::vector<std::string> samples;
  std::vector<double> values;  ///< row-major, genes x samples

  std::size_t gene_count() const noexcept { return genes.size(); }
  std::size_t sample_count() const noexcept { return samples.size(); }
  std::span<const double> row(std::size_t g) const {
    return {values.data() + g * samples.size(), samples.size()};
  }
};

struct LabelVector {
  std::vector<std::string> samples;
  std::vector<std::uint8_t> values;  ///< 1 for condition 1 (cases)
};

struct GeneSet {
  std::string name;
  std::string description;
  std::vector<std::string> genes;  ///< in file order, duplicates removed
};

struct GeneSetCollection {
  std::vector<GeneSet> sets;
};

/// All readers throw InputError with the offending line number on malformed
/// input: ragged rows, non-numeric or missing values, duplicate ids.
ExpressionMatrix read_matrix_tsv(std::istream& in);
ExpressionMatrix read_matrix_tsv(const std::string& path);

/// One `sample,label` row per sample with label 0 or 1. A first row whose
/// label field is not 0 or 1 is taken as a header.
LabelVector read_labels_csv(std::istream& in);
LabelVector read_labels_csv(const std::string& path);

/// `name<TAB>description<TAB>gene...` per line; blank lines are skipped.
GeneSetCollection read_gmt(std::istream& in);
GeneSetCollection read_gmt(const std::string& path);

/// Labels in the column order of `matrix`, matched by sample id. The label
/// file must name exactly the matrix samples, and both classes must occur.
std::vector<std::uint8_t> align_labels(const LabelVector& labels,
                                       const ExpressionMatrix& matrix);

}  // namespace permcap
