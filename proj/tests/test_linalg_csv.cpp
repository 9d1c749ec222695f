#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "bidbench/csv.hpp"
#include "bidbench/linalg.hpp"

using namespace bidbench;

namespace {

std::string temp_path(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "bidbench_linalg_csv_tests";
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("mean and sample sd match hand computation") {
  const std::vector<double> v{1.0, 2.0, 3.0, 10.0};
  REQUIRE(mean(v) == 4.0);
  // variance with n-1: ((-3)^2 + (-2)^2 + (-1)^2 + 6^2)/3 = 50/3
  REQUIRE(std::abs(sample_sd(v) - 4.08248290463863) < 1e-12);
  REQUIRE_THROWS_AS(mean(std::vector<double>{}), ArgumentError);
  REQUIRE_THROWS_AS(sample_sd(std::vector<double>{1.0}), ArgumentError);
}

TEST_CASE("dot product and its length check") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{4.0, -5.0, 6.0};
  REQUIRE(dot(a, b) == 12.0);
  REQUIRE_THROWS_AS(dot(a, std::vector<double>{1.0}), ArgumentError);
}

TEST_CASE("solve_spd recovers the solution of a known system") {
  // A is symmetric positive definite; x* = (1, -2, 3) gives rhs = A x*.
  const std::vector<double> a{4, 2, 2, 2, 5, 3, 2, 3, 6};
  const std::vector<double> rhs{6, 1, 14};
  const auto x = solve_spd(a, rhs, 3);
  REQUIRE(x.size() == 3);
  REQUIRE(std::abs(x[0] - 1.0) < 1e-12);
  REQUIRE(std::abs(x[1] + 2.0) < 1e-12);
  REQUIRE(std::abs(x[2] - 3.0) < 1e-12);
}

TEST_CASE("solve_spd rejects a singular matrix") {
  // Second row is a copy of the first, so the matrix is rank deficient.
  const std::vector<double> a{1, 1, 1, 1, 1, 1, 1, 1, 2};
  REQUIRE_THROWS_AS(solve_spd(a, std::vector<double>{1, 1, 1}, 3), DegenerateDataError);
  REQUIRE_THROWS_AS(solve_spd(std::vector<double>{1, 2, 2, 1}, std::vector<double>{1}, 1),
                    ArgumentError);
}

TEST_CASE("render_csv quotes only what needs quoting") {
  const std::string text = render_csv({"plain", "with,comma", "with\"quote"},
                                      {{"1", "2.5", "x"}});
  REQUIRE(text == "plain,\"with,comma\",\"with\"\"quote\"\n1,2.5,x\n");
  REQUIRE_THROWS_AS(render_csv({"a", "b"}, {{"1"}}), ArgumentError);
}

TEST_CASE("read_numeric_csv round trips rendered numbers") {
  const std::string path = temp_path("roundtrip.csv");
  write_text_file(path, render_csv({"x", "y"}, {{"1", "2"}, {"-0.5", "1e3"}}));
  const NumericCsv csv = read_numeric_csv(path);
  REQUIRE(csv.columns == std::vector<std::string>{"x", "y"});
  REQUIRE(csv.rows == 2);
  REQUIRE(csv.at(0, 0) == 1.0);
  REQUIRE(csv.at(0, 1) == 2.0);
  REQUIRE(csv.at(1, 0) == -0.5);
  REQUIRE(csv.at(1, 1) == 1000.0);
  REQUIRE(csv.column("y") == 1);
  REQUIRE(csv.column("absent") == -1);
}

TEST_CASE("read_numeric_csv names the offending cell") {
  const std::string path = temp_path("bad.csv");

  write_text_file(path, "a,b\n1,\n");
  try {
    read_numeric_csv(path);
    FAIL("expected IngestionError for a missing cell");
  } catch (const IngestionError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("row 1") != std::string::npos);
    REQUIRE(msg.find("column 'b'") != std::string::npos);
  }

  write_text_file(path, "a,b\n1,2\n3,oops\n");
  try {
    read_numeric_csv(path);
    FAIL("expected ParseError for a non-numeric cell");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("row 2") != std::string::npos);
    REQUIRE(msg.find("column 'b'") != std::string::npos);
    REQUIRE(msg.find("oops") != std::string::npos);
  }

  write_text_file(path, "a,b\n1,inf\n");
  REQUIRE_THROWS_AS(read_numeric_csv(path), ParseError);

  write_text_file(path, "a,b\n1,2,3\n");
  REQUIRE_THROWS_AS(read_numeric_csv(path), ParseError);

  write_text_file(path, "");
  REQUIRE_THROWS_AS(read_numeric_csv(path), IngestionError);

  REQUIRE_THROWS_AS(read_numeric_csv(temp_path("no_such_file.csv")), IngestionError);
}

TEST_CASE("blank lines and CRLF endings are tolerated") {
  const std::string path = temp_path("crlf.csv");
  write_text_file(path, "a,b\r\n1,2\r\n\r\n3,4\r\n");
  const NumericCsv csv = read_numeric_csv(path);
  REQUIRE(csv.rows == 2);
  REQUIRE(csv.at(1, 0) == 3.0);
  REQUIRE(csv.at(1, 1) == 4.0);
}

TEST_CASE("text file helpers write and read back bytes unchanged") {
  const std::string path = temp_path("bytes.txt");
  const std::string content = "line1\nline2\n";
  write_text_file(path, content);
  REQUIRE(read_text_file(path) == content);
  REQUIRE_THROWS_AS(read_text_file(temp_path("missing.txt")), IngestionError);
}
