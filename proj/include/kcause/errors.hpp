#pragma once

#include <stdexcept>
#include <string>

namespace kcause {

/// Linear-algebra failure: a factorization did not succeed even after the
/// jitter escalation schedule, or a solve left an unacceptable residual.
/// The message names the solve that failed.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed tabular input. Row and column are 1-based and count the header
/// as row 1.
class CsvError : public std::runtime_error {
 public:
  CsvError(int row, int column, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ", column " +
                           std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  int row() const { return row_; }
  int column() const { return column_; }

 private:
  int row_;
  int column_;
};

/// Invalid run configuration. Carries the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("field '" + field + "': " + what), field_(field) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace kcause
