#include <doctest.h>

#include <sstream>

#include "hfnet/csv.hpp"

using namespace hfnet;

TEST_CASE("reads header and trimmed cells") {
  std::istringstream in("a, b ,c\r\n1,2.5, x \n\n3,4,y\n");
  const auto t = CsvTable::read(in);
  CHECK(t.header() == std::vector<std::string>{"a", "b", "c"});
  CHECK(t.rows() == 2);
  CHECK(t.column("b") == 1);
  CHECK(t.number(0, 1) == 2.5);
  CHECK(t.cell(0, 2) == "x");
  CHECK(t.cell(1, 2) == "y");
}

TEST_CASE("malformed tables") {
  std::istringstream empty("");
  CHECK_THROWS_AS(CsvTable::read(empty), std::runtime_error);
  std::istringstream ragged("a,b\n1\n");
  CHECK_THROWS_AS(CsvTable::read(ragged), std::runtime_error);
  std::istringstream ok("a\nfoo\n");
  const auto t = CsvTable::read(ok);
  CHECK_THROWS_AS(t.column("z"), std::runtime_error);
  CHECK_THROWS_AS(t.number(0, 0), std::runtime_error);
  CHECK_THROWS_AS(CsvTable::read_file("/nonexistent/file.csv"), std::runtime_error);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(1e6) == "1000000");
  std::ostringstream out;
  write_csv_row(out, {"x", "1", ""});
  CHECK(out.str() == "x,1,\n");
}
