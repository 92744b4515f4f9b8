#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fracecon {

/// Shortest round-trip form: 17 significant digits, "inf"/"-inf"/"nan" spelled out.
std::string format_real(double x);

/// Writes one comma-separated row terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& cells);

/// Reads a CSV with a header row into named numeric columns. Empty cells become NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};
CsvTable read_csv(std::istream& in);

}  // namespace fracecon
