#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace chronos {

using Cell = std::variant<long long, double, std::string>;

/// Rectangular table with named columns. Reals print with 17 significant
/// digits so values survive a text round trip.
class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.size(); }

  /// Throws DimensionMismatch when the row width differs from the header.
  void add_row(std::vector<Cell> row);

  const Cell& at(std::size_t row, std::size_t column) const { return rows_.at(row).at(column); }
  std::size_t column_index(const std::string& name) const;
  double real(std::size_t row, const std::string& column) const;

  /// Header line then one line per row, comma separated, LF endings.
  void write_csv(std::ostream& out) const;
  std::string to_csv() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_real(double x);
std::string format_cell(const Cell& c);

}  // namespace chronos
