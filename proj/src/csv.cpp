#include "mfc/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfc {

CsvWriter::CsvWriter(const std::string &path,
                     std::vector<std::string> columns)
    : path_(path), columns_(columns.size()) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("CsvWriter: cannot write " + path);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i)
      out << ',';
    out << columns[i];
  }
  out << '\n';
}

std::string CsvWriter::format_number(Scalar v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void CsvWriter::write_row(const std::vector<Scalar> &values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (Scalar v : values)
    cells.push_back(format_number(v));
  write_row_mixed(cells);
}

void CsvWriter::write_row_mixed(const std::vector<std::string> &values) {
  if (values.size() != columns_)
    throw std::invalid_argument("CsvWriter: column count mismatch for " +
                                path_);
  std::ofstream out(path_, std::ios::app);
  if (!out)
    throw std::runtime_error("CsvWriter: cannot append to " + path_);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i)
      out << ',';
    out << values[i];
  }
  out << '\n';
}

int CsvTable::column_index(const std::string &name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name)
      return static_cast<int>(i);
  return -1;
}

std::vector<Scalar> CsvTable::numeric_column(int index) const {
  if (index < 0 || index >= static_cast<int>(header.size()))
    throw std::out_of_range("CsvTable: bad column index");
  std::vector<Scalar> out;
  out.reserve(rows.size());
  for (const auto &row : rows)
    out.push_back(std::stod(row[index]));
  return out;
}

CsvTable read_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("read_csv: cannot read " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size())
        throw std::runtime_error("read_csv: ragged row in " + path);
      table.rows.push_back(std::move(cells));
    }
  }
  if (first)
    throw std::runtime_error("read_csv: missing header in " + path);
  return table;
}

} // namespace mfc
