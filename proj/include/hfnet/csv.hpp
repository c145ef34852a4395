#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hfnet {

// Minimal comma-separated reader: header row required, no quoting.
class CsvTable {
 public:
  static CsvTable read(std::istream& in, const std::string& source = "<stream>");
  static CsvTable read_file(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::size_t column(std::string_view name) const;  // throws if absent
  const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  double number(std::size_t row, std::size_t col) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// 12 significant digits.
std::string format_number(double value);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace hfnet
