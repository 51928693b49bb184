#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kcause/dataset.hpp"
#include "kcause/errors.hpp"

namespace kcause {

namespace detail {

inline std::string trim_cr(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Shortest representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Write the dataset as comma-separated text: a header of column names, then
/// one numeric row per sample. Multi-coordinate blocks widen into suffixed
/// headers name_1, name_2, ... Values use the shortest round-trip form, so a
/// read-back reproduces every double bit for bit.
inline void write_csv(const std::string& path, const CausalDataset& data) {
  std::ofstream out(path);
  if (!out) throw CsvError(0, 0, "cannot open '" + path + "' for writing");

  std::vector<std::string> headers;
  for (const auto& name : data.column_order()) {
    const Eigen::Index width = data.column(name).cols();
    if (width == 1) {
      headers.push_back(name);
    } else {
      for (Eigen::Index c = 0; c < width; ++c) {
        headers.push_back(name + "_" + std::to_string(c + 1));
      }
    }
  }
  for (std::size_t i = 0; i < headers.size(); ++i) {
    if (i) out << ',';
    out << headers[i];
  }
  out << '\n';

  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    bool first = true;
    for (const auto& name : data.column_order()) {
      const Eigen::MatrixXd& block = data.column(name);
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        if (!first) out << ',';
        first = false;
        out << detail::format_double(block(r, c));
      }
    }
    out << '\n';
  }
  if (!out) throw CsvError(0, 0, "write failed for '" + path + "'");
}

/// Read comma-separated numeric text into a dataset of scalar columns (no
/// roles). The first line is a required header; every later cell must parse
/// as a number. Errors carry 1-based row and column, counting the header as
/// row 1.
inline CausalDataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(0, 0, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, 1, "missing header row");
  const std::vector<std::string> headers = detail::split_commas(detail::trim_cr(line));
  for (std::size_t c = 0; c < headers.size(); ++c) {
    if (headers[c].empty()) {
      throw CsvError(1, static_cast<int>(c + 1), "empty header name");
    }
    for (std::size_t c2 = 0; c2 < c; ++c2) {
      if (headers[c2] == headers[c]) {
        throw CsvError(1, static_cast<int>(c + 1),
                       "duplicate header '" + headers[c] + "'");
      }
    }
  }

  std::vector<std::vector<double>> columns(headers.size());
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string clean = detail::trim_cr(line);
    if (clean.empty()) {
      // Tolerate blank lines at the end of the file; reject them amid data.
      const int blank_row = row;
      while (std::getline(in, line)) {
        if (!detail::trim_cr(line).empty()) {
          throw CsvError(blank_row, 1, "blank line amid data rows");
        }
      }
      break;
    }
    const std::vector<std::string> cells = detail::split_commas(clean);
    if (cells.size() != headers.size()) {
      throw CsvError(row, static_cast<int>(cells.size()),
                     "expected " + std::to_string(headers.size()) + " cells, got " +
                         std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double value = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw CsvError(row, static_cast<int>(c + 1),
                       "cannot parse '" + cell + "' as a number");
      }
      columns[c].push_back(value);
    }
  }
  if (columns.front().empty()) throw CsvError(2, 1, "no data rows");

  CausalDataset data;
  for (std::size_t c = 0; c < headers.size(); ++c) {
    const Eigen::VectorXd col = Eigen::Map<const Eigen::VectorXd>(
        columns[c].data(), static_cast<Eigen::Index>(columns[c].size()));
    data.add_column(headers[c], col);
  }
  return data;
}

}  // namespace kcause
