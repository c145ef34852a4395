#include "hfnet/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace hfnet {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

CsvTable CsvTable::read(std::istream& in, const std::string& source) {
  CsvTable t;
  t.source_ = source;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source + ": missing header row");
  t.header_ = split_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header_.size()) {
      throw std::runtime_error(fmt::format("{}:{}: expected {} fields, got {}", source, lineno, t.header_.size(),
                                           cells.size()));
    }
    t.rows_.push_back(std::move(cells));
  }
  return t;
}

CsvTable CsvTable::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read(in, path.string());
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw std::runtime_error(fmt::format("{}: missing column '{}'", source_, name));
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& s = rows_.at(row).at(col);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(fmt::format("{}: row {}: '{}' is not a number", source_, row + 2, s));
  }
  return v;
}

std::string format_number(double value) { return fmt::format("{:.12g}", value); }

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

}  // namespace hfnet
