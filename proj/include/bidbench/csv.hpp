#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bidbench/errors.hpp"

namespace bidbench {

/// A fully numeric CSV: header row + double cells, row-major.
struct NumericCsv {
  std::vector<std::string> columns;
  std::vector<double> data;
  std::size_t rows = 0;

  double at(std::size_t r, std::size_t c) const { return data[r * columns.size() + c]; }

  /// Index of a named column, or -1.
  int column(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) return int(j);
    return -1;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

inline std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

/// Read a numeric CSV with a header row. A missing/empty cell is an ingestion
/// error and a non-numeric cell a parse error, both naming the 1-based data
/// row and the column.
inline NumericCsv read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  NumericCsv csv;
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("'" + path + "' is empty (no header row)");
  csv.columns = detail::split_csv_line(line);
  if (csv.columns.empty() || (csv.columns.size() == 1 && csv.columns[0].empty()))
    throw IngestionError("'" + path + "' has an empty header row");

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != csv.columns.size())
      throw ParseError("'" + path + "' row " + std::to_string(row) + ": expected " +
                       std::to_string(csv.columns.size()) + " cells, found " +
                       std::to_string(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string& cell = cells[j];
      const std::string where =
          "row " + std::to_string(row) + ", column '" + csv.columns[j] + "'";
      if (cell.empty())
        throw IngestionError("'" + path + "': missing value at " + where);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size())
        throw ParseError("'" + path + "': non-numeric cell \"" + cell + "\" at " + where);
      if (!std::isfinite(v))
        throw ParseError("'" + path + "': non-finite value at " + where);
      csv.data.push_back(v);
    }
  }
  csv.rows = row;
  return csv;
}

/// Render rows of pre-formatted cells; minimal quoting, '\n' line ends.
inline std::string render_csv(const std::vector<std::string>& columns,
                              const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out << ',';
    out << detail::csv_quote(columns[j]);
  }
  out << '\n';
  for (const auto& r : rows) {
    if (r.size() != columns.size()) throw ArgumentError("render_csv: ragged row");
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ',';
      out << detail::csv_quote(r[j]);
    }
    out << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IngestionError("write to '" + path + "' failed");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bidbench
