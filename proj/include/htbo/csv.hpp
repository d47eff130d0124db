#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace htbo {

/// A header row of column names over a dense block of reals (one row per
/// observation).
struct NumericTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;

  /// Throws InputError for unknown names.
  std::size_t column_index(const std::string& name) const;
};

/// Strict parser: every row must have exactly one decimal value per header
/// column. Empty cells, non-numeric text, and ragged rows are InputErrors.
NumericTable parse_numeric_csv(std::istream& in);
NumericTable read_numeric_csv(const std::filesystem::path& path);

}  // namespace htbo
