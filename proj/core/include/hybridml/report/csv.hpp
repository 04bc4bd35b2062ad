#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hybridml::report {

/// In-memory table of string cells; numeric cells are formatted by cell().
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool empty() const noexcept { return rows.empty(); }
  /// Throws if the row width differs from the header.
  void add_row(std::vector<std::string> row);
  /// Index of a header column; throws Error("report", ...) if absent.
  std::size_t column(const std::string& name) const;
  /// Numeric value of a cell; empty cells read as NaN.
  double number(std::size_t row, const std::string& name) const;
};

/// %.10g; NaN becomes an empty cell.
std::string cell(double value);
std::string cell(long long value);
std::string cell(int value);
std::string cell(bool value);

/// RFC 4180: CRLF line ends, fields quoted when they contain a comma, quote, CR or LF.
void write_csv(std::ostream& out, const CsvTable& table);
std::string to_csv(const CsvTable& table);

/// Parses RFC 4180 text (first record is the header).
CsvTable parse_csv(const std::string& text);

}  // namespace hybridml::report
