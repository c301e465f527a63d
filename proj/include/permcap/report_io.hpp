#pragma once

// Flat report records written as JSON lines or CSV and read back. Doubles are
// written with round-trip precision; non-finite numbers are stored as null.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace permcap {

using FieldValue = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

struct Field {
  std::string key;
  FieldValue value;

  bool operator==(const Field&) const = default;
};

using Record = std::vector<Field>;

/// A double field, null when not finite.
FieldValue number(double v);

enum class ReportFormat { json, csv };

ReportFormat parse_format(const std::string& name);

void write_jsonl(std::ostream& out, const std::vector<Record>& records);
/// Header from the first record's keys; every record must share them.
void write_csv(std::ostream& out, const std::vector<Record>& records);
void write_records(std::ostream& out, const std::vector<Record>& records, ReportFormat f);

std::vector<Record> read_jsonl(std::istream& in);
/// Quoted cells are strings; unquoted cells parse as bool, integer, double or
/// null (empty).
std::vector<Record> read_csv(std::istream& in);

}  // namespace permcap
