#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bsde/report.hpp"

using namespace bsde;

namespace {
std::vector<TableRow> sample_rows() {
  return {
      {1.0, 0.5166, 0.0123, 0.0, "ok"},
      {2.0, 0.1 + 0.2, 1e-300, -0.25, "converged"},
      {8.0, -1.0 / 3.0, 0.0, 0.3000000000000001, "x"},
  };
}
}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double x : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 1e-300, 6.02e23,
                   0.30000000000000004, -2.5e-8}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv round-trip is exact") {
  auto rows = sample_rows();
  auto csv = table_to_csv(rows);
  CHECK(csv.rfind("n_or_level,y0,stderr,gap,verdict", 0) == 0);
  auto back = parse_table_csv(csv);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].n_or_level == rows[i].n_or_level);  // bitwise
    CHECK(back[i].y0 == rows[i].y0);
    CHECK(back[i].stderr_ == rows[i].stderr_);
    CHECK(back[i].gap == rows[i].gap);
    CHECK(back[i].verdict == rows[i].verdict);
  }
  // serializing again is byte-identical
  CHECK(table_to_csv(back) == csv);
}

TEST_CASE("csv parser rejects malformed input") {
  CHECK_THROWS_AS(parse_table_csv("bogus header\n1,2,3,4,5\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      parse_table_csv("n_or_level,y0,stderr,gap,verdict\n1,2,3\n"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_table_csv("n_or_level,y0,stderr,gap,verdict\nx,2,3,4,v\n"),
      std::invalid_argument);
}

TEST_CASE("json report is deterministic and schema-stable") {
  ExperimentReport rep;
  rep.theorem = "T1_minimal";
  rep.pass = true;
  rep.seed = 42;
  rep.rows = sample_rows();
  rep.tail_ratio = 0.25;
  rep.scalars["y0_dominator"] = 1.25;
  rep.messages.push_back("all rungs ordered");

  nlohmann::json echo = {{"generator", "example1"}, {"seed", 42}};
  auto j = report_to_json(rep, echo);
  CHECK(j.at("schema_version") == kReportSchemaVersion);
  CHECK(j.at("theorem") == "T1_minimal");
  CHECK(j.at("pass") == true);
  CHECK(j.at("seed") == 42);
  CHECK(j.at("config").at("generator") == "example1");
  CHECK(j.at("scalars").at("y0_dominator") == 1.25);
  REQUIRE(j.at("table").size() == 3);
  CHECK(j.at("table")[0].at("y0") == 0.5166);

  auto again = report_to_json(rep, echo);
  CHECK(j.dump(2) == again.dump(2));  // byte-identical
}

TEST_CASE("write_file creates parents and writes the payload") {
  auto dir = std::filesystem::temp_directory_path() / "report_test_dir";
  std::filesystem::remove_all(dir);
  auto path = (dir / "out" / "table.csv").string();
  write_file(path, "hello\n");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "hello");
  std::filesystem::remove_all(dir);
}
