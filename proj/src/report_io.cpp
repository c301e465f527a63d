#include "permcap/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "permcap/errors.hpp"

namespace permcap {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_cell(const FieldValue& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return std::isfinite(d) ? format_double(d) : ""; }
    std::string operator()(const std::string& s) const { return csv_quote(s); }
  };
  return std::visit(Visitor{}, v);
}

ordered_json json_value(const FieldValue& v) {
  struct Visitor {
    ordered_json operator()(std::monostate) const { return nullptr; }
    ordered_json operator()(bool b) const { return b; }
    ordered_json operator()(std::int64_t i) const { return i; }
    ordered_json operator()(double d) const {
      return std::isfinite(d) ? ordered_json(d) : ordered_json(nullptr);
    }
    ordered_json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

FieldValue from_json(const ordered_json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw InputError("unsupported JSON value in report record");
}

FieldValue parse_unquoted(const std::string& s) {
  if (s.empty()) return std::monostate{};
  if (s == "true") return true;
  if (s == "false") return false;
  const char* end = s.data() + s.size();
  if (s.find_first_of(".eE") == std::string::npos) {
    std::int64_t i = 0;
    const auto [p, ec] = std::from_chars(s.data(), end, i);
    if (ec == std::errc() && p == end) return i;
  }
  double d = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), end, d);
  if (ec == std::errc() && p == end) return d;
  throw InputError("unparseable CSV cell '" + s + "'");
}

struct Cell {
  std::string text;
  bool quoted = false;
};

// Splits CSV text into rows of cells, honouring quotes around separators,
// newlines and doubled quote characters.
std::vector<std::vector<Cell>> tokenize_csv(std::istream& in) {
  std::vector<std::vector<Cell>> rows;
  std::vector<Cell> row;
  Cell cell;
  bool in_quotes = false;
  bool any = false;
  char c;
  auto end_cell = [&] {
    row.push_back(std::move(cell));
    cell = Cell{};
  };
  auto end_row = [&] {
    end_cell();
    rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell.text += '"';
        } else {
          in_quotes = false;
        }
      } else {
        cell.text += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      cell.quoted = true;
      any = true;
    } else if (c == ',') {
      end_cell();
      any = true;
    } else if (c == '\n') {
      if (any || !cell.text.empty()) end_row();
    } else if (c != '\r') {
      cell.text += c;
      any = true;
    }
  }
  if (in_quotes) throw InputError("unterminated quote in CSV report");
  if (any || !cell.text.empty()) end_row();
  return rows;
}

}  // namespace

FieldValue number(double v) {
  if (!std::isfinite(v)) return std::monostate{};
  return v;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "json" || name == "jsonl") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw InputError("unknown report format '" + name + "'");
}

void write_jsonl(std::ostream& out, const std::vector<Record>& records) {
  for (const Record& r : records) {
    ordered_json j = ordered_json::object();
    for (const Field& f : r) j[f.key] = json_value(f.value);
    out << j.dump() << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<Record>& records) {
  if (records.empty()) return;
  const Record& first = records.front();
  for (std::size_t i = 0; i < first.size(); ++i) {
    out << (i ? "," : "") << csv_quote(first[i].key);
  }
  out << '\n';
  for (const Record& r : records) {
    if (r.size() != first.size()) throw InputError("CSV records must share one field list");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i].key != first[i].key) throw InputError("CSV records must share one field list");
      out << (i ? "," : "") << csv_cell(r[i].value);
    }
    out << '\n';
  }
}

void write_records(std::ostream& out, const std::vector<Record>& records, ReportFormat f) {
  if (f == ReportFormat::json) {
    write_jsonl(out, records);
  } else {
    write_csv(out, records);
  }
}

std::vector<Record> read_jsonl(std::istream& in) {
  std::vector<Record> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(std::string("malformed JSON report line: ") + e.what());
    }
    if (!j.is_object()) throw InputError("JSON report line is not an object");
    Record r;
    for (auto it = j.begin(); it != j.end(); ++it) r.push_back({it.key(), from_json(it.value())});
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Record> read_csv(std::istream& in) {
  const auto rows = tokenize_csv(in);
  std::vector<Record> out;
  if (rows.empty()) return out;
  const auto& header = rows.front();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != header.size()) {
      throw InputError("CSV report row " + std::to_string(i + 1) + " has " +
                       std::to_string(rows[i].size()) + " cells, expected " +
                       std::to_string(header.size()));
    }
    Record r;
    for (std::size_t k = 0; k < header.size(); ++k) {
      const Cell& c = rows[i][k];
      r.push_back({header[k].text, c.quoted ? FieldValue(c.text) : parse_unquoted(c.text)});
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace permcap
