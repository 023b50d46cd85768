#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "npl/error.hpp"
#include "npl/points.hpp"

namespace npl::io {

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row

  std::size_t column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return j;
    }
    throw DataError(path + ": no column named '" + name + "'");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace detail

/// Comma-separated numeric table with a mandatory header row. Blank lines
/// are skipped; any other malformed line is a DataError naming the line.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  CsvTable t;
  t.path = path;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line);
    if (!have_header) {
      for (auto c : cells) {
        if (c.empty()) throw DataError(path + ":" + std::to_string(line_no) + ": empty column name in header");
        t.header.emplace_back(c);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto c = cells[j];
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), row[j]);
      if (c.empty() || ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(row[j])) {
        throw DataError(path + ":" + std::to_string(line_no) + ": column '" + t.header[j] +
                        "' is not a finite number: '" + std::string(c) + "'");
      }
    }
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw DataError(path + ": missing header row");
  return t;
}

/// Shortest text that is guaranteed to round-trip: 17 significant digits.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t j = 0; j < cells.size(); ++j) {
    if (j) out << ',';
    out << cells[j];
  }
  out << '\n';
}

/// Which columns play which role.
struct ColumnSchema {
  std::optional<std::string> y_column;  // response / scalar observation
  std::vector<std::string> x_columns;   // covariates or vector components; empty = all non-y columns
  bool standardize = false;             // applies to x columns
  bool binary_response = false;
  bool covariates = true;               // false: y only
};

/// Per-column affine map x -> (x - mean) / sd.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> sd;

  bool empty() const { return mean.empty(); }

  void apply(std::vector<double>& x) const {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean[j]) / sd[j];
  }
};

struct IngestedData {
  std::vector<double> y;
  std::vector<std::vector<double>> x;
  std::vector<std::string> x_names;
  Standardization standardization;

  std::vector<ScalarPoint> scalar_points() const { return y; }
  std::vector<VectorPoint> vector_points() const { return x; }
  std::vector<LabeledPoint> labeled_points() const {
    std::vector<LabeledPoint> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = LabeledPoint{y[i], x[i]};
    return out;
  }
};

/// Splits a parsed table into response and covariates. If `fixed` is given
/// it is applied instead of estimating a standardisation from the data
/// (used for test sets, which must reuse training statistics).
inline IngestedData ingest_table(const CsvTable& t, const ColumnSchema& schema,
                                 const Standardization* fixed = nullptr) {
  IngestedData out;
  std::optional<std::size_t> ycol;
  if (schema.y_column) ycol = t.column(*schema.y_column);
  std::vector<std::size_t> xcols;
  if (!schema.covariates) {
  } else if (schema.x_columns.empty()) {
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      if (!ycol || j != *ycol) xcols.push_back(j);
    }
  } else {
    for (const auto& name : schema.x_columns) xcols.push_back(t.column(name));
  }
  for (std::size_t j : xcols) out.x_names.push_back(t.header[j]);

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (ycol) {
      const double y = row[*ycol];
      if (schema.binary_response && y != 0.0 && y != 1.0) {
        throw DataError(t.path + ":" + std::to_string(t.line_numbers[r]) + ": response '" + *schema.y_column +
                        "' must be 0 or 1 (data row " + std::to_string(r + 1) + ")");
      }
      out.y.push_back(y);
    }
    std::vector<double> x;
    x.reserve(xcols.size());
    for (std::size_t j : xcols) x.push_back(row[j]);
    out.x.push_back(std::move(x));
  }

  if (fixed != nullptr && !fixed->empty()) {
    if (fixed->mean.size() != xcols.size()) throw DataError(t.path + ": standardisation width mismatch");
    out.standardization = *fixed;
  } else if (schema.standardize) {
    const double n = static_cast<double>(t.rows.size());
    if (t.rows.size() < 2) throw DataError(t.path + ": standardisation needs at least two rows");
    Standardization s;
    for (std::size_t c = 0; c < xcols.size(); ++c) {
      double mean = 0.0;
      for (const auto& x : out.x) mean += x[c];
      mean /= n;
      double resid = 0.0;
      for (const auto& x : out.x) resid += x[c] - mean;
      mean += resid / n;
      double var = 0.0;
      for (const auto& x : out.x) var += (x[c] - mean) * (x[c] - mean);
      const double sd = std::sqrt(var / n);
      if (!(sd > 0.0)) throw DataError(t.path + ": column '" + out.x_names[c] + "' has zero variance");
      s.mean.push_back(mean);
      s.sd.push_back(sd);
    }
    out.standardization = std::move(s);
  }
  if (!out.standardization.empty()) {
    for (auto& x : out.x) out.standardization.apply(x);
  }
  return out;
}

inline IngestedData ingest_csv(const std::string& path, const ColumnSchema& schema,
                               const Standardization* fixed = nullptr) {
  return ingest_table(read_csv(path), schema, fixed);
}

}  // namespace npl::io
