#pragma once

#include <Eigen/Dense>

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kcause {

/// Causal roles a column block can play: treatment, outcome, adjustment set,
/// mediator, effect modifiers, instrument, outcome proxy.
enum class Role { T, Y, X, S, V, Z, U };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::T: return "t";
    case Role::Y: return "y";
    case Role::X: return "x";
    case Role::S: return "s";
    case Role::V: return "v";
    case Role::Z: return "z";
    case Role::U: return "u";
  }
  return "?";
}

inline Role role_from_name(std::string_view s) {
  if (s == "t" || s == "T") return Role::T;
  if (s == "y" || s == "Y") return Role::Y;
  if (s == "x" || s == "X") return Role::X;
  if (s == "s" || s == "S") return Role::S;
  if (s == "v" || s == "V") return Role::V;
  if (s == "z" || s == "Z") return Role::Z;
  if (s == "u" || s == "U") return Role::U;
  throw std::invalid_argument("unknown role '" + std::string(s) +
                              "' (expected one of t, y, x, s, v, z, u)");
}

/// Column-oriented sample with named column blocks and a role map. Every
/// block has the same number of rows; a block may span several coordinates.
class CausalDataset {
 public:
  CausalDataset() = default;

  void add_column(const std::string& name, Eigen::MatrixXd values) {
    if (name.empty()) throw std::invalid_argument("column name must be non-empty");
    if (columns_.count(name)) throw std::invalid_argument("duplicate column '" + name + "'");
    if (values.rows() == 0 || values.cols() == 0) {
      throw std::invalid_argument("column '" + name + "' must be non-empty");
    }
    if (rows_ >= 0 && values.rows() != rows_) {
      throw std::invalid_argument("column '" + name + "' has " +
                                  std::to_string(values.rows()) + " rows, expected " +
                                  std::to_string(rows_));
    }
    rows_ = values.rows();
    order_.push_back(name);
    columns_.emplace(name, std::move(values));
  }

  void add_column(const std::string& name, const Eigen::VectorXd& values) {
    add_column(name, Eigen::MatrixXd(values));
  }

  void set_role(Role role, std::vector<std::string> columns) {
    if (columns.empty()) {
      throw std::invalid_argument(std::string("role '") + role_name(role) +
                                  "' needs at least one column");
    }
    for (const auto& c : columns) {
      if (!columns_.count(c)) {
        throw std::invalid_argument(std::string("role '") + role_name(role) +
                                    "' references unknown column '" + c + "'");
      }
    }
    roles_[role] = std::move(columns);
  }

  Eigen::Index rows() const { return rows_ < 0 ? 0 : rows_; }

  bool has_role(Role role) const { return roles_.count(role) != 0; }

  const std::vector<std::string>& role_columns(Role role) const {
    auto it = roles_.find(role);
    if (it == roles_.end()) {
      throw std::invalid_argument(std::string("missing role '") + role_name(role) + "'");
    }
    return it->second;
  }

  /// Role columns concatenated left to right in role order.
  Eigen::MatrixXd role_matrix(Role role) const {
    const auto& names = role_columns(role);
    Eigen::Index width = 0;
    for (const auto& c : names) width += columns_.at(c).cols();
    Eigen::MatrixXd out(rows(), width);
    Eigen::Index offset = 0;
    for (const auto& c : names) {
      const Eigen::MatrixXd& block = columns_.at(c);
      out.middleCols(offset, block.cols()) = block;
      offset += block.cols();
    }
    return out;
  }

  bool has_column(const std::string& name) const { return columns_.count(name) != 0; }

  const Eigen::MatrixXd& column(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw std::invalid_argument("unknown column '" + name + "'");
    return it->second;
  }

  const std::vector<std::string>& column_order() const { return order_; }

  const std::map<Role, std::vector<std::string>>& roles() const { return roles_; }

  /// Row subset, preserving column order and roles.
  CausalDataset subset(const std::vector<int>& row_ids) const {
    CausalDataset out;
    for (const auto& name : order_) {
      const Eigen::MatrixXd& block = columns_.at(name);
      Eigen::MatrixXd sub(static_cast<Eigen::Index>(row_ids.size()), block.cols());
      for (std::size_t i = 0; i < row_ids.size(); ++i) {
        if (row_ids[i] < 0 || row_ids[i] >= rows()) {
          throw std::invalid_argument("subset row index out of range");
        }
        sub.row(static_cast<Eigen::Index>(i)) = block.row(row_ids[i]);
      }
      out.add_column(name, std::move(sub));
    }
    for (const auto& [role, cols] : roles_) out.set_role(role, cols);
    return out;
  }

 private:
  Eigen::Index rows_ = -1;
  std::vector<std::string> order_;
  std::map<std::string, Eigen::MatrixXd> columns_;
  std::map<Role, std::vector<std::string>> roles_;
};

}  // namespace kcause
