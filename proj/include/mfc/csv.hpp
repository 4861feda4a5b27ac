#pragma once

#include <string>
#include <vector>

#include "mfc/types.hpp"

namespace mfc {

// Append-style CSV writer with a fixed header and deterministic number
// formatting (shortest round-trip representation).
class CsvWriter {
public:
  CsvWriter(const std::string &path, std::vector<std::string> columns);

  void write_row(const std::vector<Scalar> &values);
  void write_row_mixed(const std::vector<std::string> &values);
  const std::string &path() const { return path_; }

  static std::string format_number(Scalar v);

private:
  std::string path_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string &name) const; // -1 when absent
  std::vector<Scalar> numeric_column(int index) const;
};

CsvTable read_csv(const std::string &path);

} // namespace mfc
