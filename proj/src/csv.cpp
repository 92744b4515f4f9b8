#include "fracecon/csv.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fracecon/config.hpp"

namespace fracecon {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw std::invalid_argument("csv: no column named '" + name + "'");
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header");
  t.header = split_cells(line);
  t.columns.resize(t.header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_cells(line);
    if (cells.size() != t.header.size())
      throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(t.header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      double v;
      if (c.empty() || c == "nan") v = std::numeric_limits<double>::quiet_NaN();
      else if (c == "inf") v = std::numeric_limits<double>::infinity();
      else if (c == "-inf") v = -std::numeric_limits<double>::infinity();
      else v = parse_real(c, "csv line " + std::to_string(line_no));
      t.columns[i].push_back(v);
    }
  }
  return t;
}

}  // namespace fracecon
