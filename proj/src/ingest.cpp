#include "permcap/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "permcap/errors.hpp"

namespace permcap {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const std::size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string_view chomp(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(const std::string& what, std::size_t line, const std::string& source) {
  throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view s, std::size_t line, const std::string& source) {
  s = trim(s);
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail("missing or non-numeric value '" + std::string(s) + "'", line, source);
  }
  return v;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

ExpressionMatrix read_matrix(std::istream& in, const std::string& source) {
  ExpressionMatrix m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) fail("no header row", lineno, source);
  const auto header = split(chomp(line), '\t');
  if (header.size() < 2) fail("header has no sample columns", lineno, source);
  std::unordered_set<std::string> seen;
  for (std::size_t j = 1; j < header.size(); ++j) {
    std::string id(trim(header[j]));
    if (id.empty()) fail("empty sample id", lineno, source);
    if (!seen.insert(id).second) fail("duplicate sample id '" + id + "'", lineno, source);
    m.samples.push_back(std::move(id));
  }
  seen.clear();
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(chomp(line), '\t');
    if (fields.size() != header.size()) {
      fail("expected " + std::to_string(header.size()) + " fields, found " +
               std::to_string(fields.size()),
           lineno, source);
    }
    std::string gene(trim(fields[0]));
    if (gene.empty()) fail("empty gene id", lineno, source);
    if (!seen.insert(gene).second) fail("duplicate gene id '" + gene + "'", lineno, source);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      m.values.push_back(parse_double(fields[j], lineno, source));
    }
    m.genes.push_back(std::move(gene));
  }
  if (m.genes.empty()) fail("matrix has no gene rows", lineno, source);
  return m;
}

LabelVector read_labels(std::istream& in, const std::string& source) {
  LabelVector out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(chomp(line), ',');
    if (fields.size() != 2) fail("expected 'sample,label'", lineno, source);
    const std::string_view label = trim(fields[1]);
    const bool valid = label == "0" || label == "1";
    if (!valid) {
      if (first) {
        first = false;
        continue;
      }
      fail("label must be 0 or 1, found '" + std::string(label) + "'", lineno, source);
    }
    first = false;
    std::string id(trim(fields[0]));
    if (id.empty()) fail("empty sample id", lineno, source);
    if (!seen.insert(id).second) fail("duplicate sample id '" + id + "'", lineno, source);
    out.samples.push_back(std::move(id));
    out.values.push_back(label == "1" ? 1 : 0);
  }
  if (out.samples.empty()) fail("no labels", lineno, source);
  return out;
}

GeneSetCollection read_sets(std::istream& in, const std::string& source) {
  GeneSetCollection c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(chomp(line), '\t');
    if (fields.size() < 3) fail("expected name, description and at least one gene", lineno, source);
    GeneSet s;
    s.name = std::string(trim(fields[0]));
    if (s.name.empty()) fail("empty gene set name", lineno, source);
    s.description = std::string(trim(fields[1]));
    std::unordered_set<std::string> seen;
    for (std::size_t j = 2; j < fields.size(); ++j) {
      std::string gene(trim(fields[j]));
      if (gene.empty()) continue;
      if (seen.insert(gene).second) s.genes.push_back(std::move(gene));
    }
    if (s.genes.empty()) fail("gene set '" + s.name + "' lists no genes", lineno, source);
    c.sets.push_back(std::move(s));
  }
  return c;
}

}  // namespace

ExpressionMatrix read_matrix_tsv(std::istream& in) { return read_matrix(in, "<matrix>"); }

ExpressionMatrix read_matrix_tsv(const std::string& path) {
  auto in = open(path);
  return read_matrix(in, path);
}

LabelVector read_labels_csv(std::istream& in) { return read_labels(in, "<labels>"); }

LabelVector read_labels_csv(const std::string& path) {
  auto in = open(path);
  return read_labels(in, path);
}

GeneSetCollection read_gmt(std::istream& in) { return read_sets(in, "<genesets>"); }

GeneSetCollection read_gmt(const std::string& path) {
  auto in = open(path);
  return read_sets(in, path);
}

std::vector<std::uint8_t> align_labels(const LabelVector& labels,
                                       const ExpressionMatrix& matrix) {
  std::unordered_map<std::string, std::uint8_t> by_id;
  for (std::size_t i = 0; i < labels.samples.size(); ++i) {
    by_id.emplace(labels.samples[i], labels.values[i]);
  }
  std::vector<std::uint8_t> out;
  out.reserve(matrix.sample_count());
  int cases = 0;
  for (const std::string& s : matrix.samples) {
    const auto it = by_id.find(s);
    if (it == by_id.end()) throw InputError("sample '" + s + "' has no label");
    out.push_back(it->second);
    cases += it->second;
  }
  if (labels.samples.size() != matrix.sample_count()) {
    throw InputError("label file names samples absent from the matrix");
  }
  if (cases == 0 || cases == static_cast<int>(out.size())) {
    throw InputError("labels must include both conditions");
  }
  return out;
}

}  // namespace permcap
