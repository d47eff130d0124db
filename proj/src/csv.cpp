#include "htbo/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "htbo/errors.hpp"

namespace htbo {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    cells.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  if (cell.empty()) {
    throw InputError("csv: missing value at row " + std::to_string(row) + ", column " +
                     std::to_string(col));
  }
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw InputError("csv: non-numeric value '" + cell + "' at row " + std::to_string(row) +
                     ", column " + std::to_string(col));
  }
  return value;
}

}  // namespace

std::size_t NumericTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw InputError("csv: no column named '" + name + "'");
}

NumericTable parse_numeric_csv(std::istream& in) {
  NumericTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw InputError("csv: empty input");
  table.columns = split_line(line);
  for (const auto& name : table.columns) {
    if (name.empty()) throw InputError("csv: empty column name in header");
  }
  const std::size_t n_cols = table.columns.size();

  std::vector<double> flat;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != n_cols) {
      throw InputError("csv: row " + std::to_string(n_rows + 1) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(n_cols));
    }
    for (std::size_t c = 0; c < n_cols; ++c) flat.push_back(parse_cell(cells[c], n_rows + 1, c));
    ++n_rows;
  }
  table.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * n_cols + c];
    }
  }
  return table;
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("csv: cannot open " + path.string());
  return parse_numeric_csv(in);
}

}  // namespace htbo
