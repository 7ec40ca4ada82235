#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>

#include "flowembed/complex.hpp"
#include "flowembed/csv.hpp"
#include "flowembed/error.hpp"

using namespace flowembed;

TEST_CASE("csv parsing") {
  const auto t = parse_csv("\xEF\xBB\xBF" "a,b,c\r\n1,\"x,y\",\"say \"\"hi\"\"\"\r\n\r\n2,,3\n");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"1", "x,y", "say \"hi\""});
  CHECK(t.rows[1] == std::vector<std::string>{"2", "", "3"});
  CHECK(t.lines == std::vector<std::size_t>{2, 4});
  CHECK(t.column("c") == 2);
  CHECK_FALSE(t.find_column("d").has_value());
  try {
    t.column("d");
    FAIL("expected MissingColumn");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingColumn);
  }

  const auto multi = parse_csv("id,text\n1,\"two\nlines\"\n");
  REQUIRE(multi.rows.size() == 1);
  CHECK(multi.rows[0][1] == "two\nlines");
  CHECK(parse_csv("").header.empty());
}

TEST_CASE("csv escaping round trips") {
  for (std::string s : {"plain", "with,comma", "quote\"inside", "line\nbreak", ""}) {
    const auto t = parse_csv("h\n" + (s.empty() ? std::string("\"\"") : csv_escape(s)) + "\n");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0] == s);
  }
  CHECK(csv_escape("plain") == "plain");
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
    const auto text = format_double(v);
    CHECK(parse_double(text) == v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
  }
}

TEST_CASE("number parsing") {
  CHECK(parse_double(" 2.5 ") == 2.5);
  CHECK(parse_double("+3") == 3.0);
  CHECK(parse_double("-1e3") == -1000.0);
  CHECK_FALSE(parse_double("").has_value());
  CHECK_FALSE(parse_double("1.5x").has_value());
  CHECK(parse_integer("42") == 42);
  CHECK(parse_integer("-7") == -7);
  CHECK_FALSE(parse_integer("4.2").has_value());
  CHECK(trim("  a b\t") == "a b");
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "flowembed_test_io";
  std::filesystem::remove_all(dir);
  const auto path = dir / "nested" / "x.txt";
  write_text_file(path, "hello\n");
  CHECK(read_text_file(path) == "hello\n");
  try {
    read_text_file(dir / "missing.txt");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
    CHECK(std::string(e.what()).find("missing.txt") != std::string::npos);
  }

  const auto sc = SimplicialComplex::build(3, std::vector<std::array<VertexId, 2>>{{0, 1}, {1, 2}, {0, 2}},
                                           std::vector<std::array<VertexId, 3>>{{0, 1, 2}});
  write_complex_file(sc, dir / "c.json");
  CHECK(read_complex_file(dir / "c.json").triangles() == sc.triangles());
  std::filesystem::remove_all(dir);
}

TEST_CASE("error kinds map to exit codes") {
  CHECK(exit_code_for(ErrorKind::IoError) == 3);
  CHECK(exit_code_for(ErrorKind::SpectralGapAmbiguity) == 4);
  CHECK(exit_code_for(ErrorKind::SolverDivergence) == 4);
  CHECK(exit_code_for(ErrorKind::ValidationError) == 2);
  CHECK(exit_code_for(ErrorKind::ParseError) == 2);
  CHECK(to_string(ErrorKind::MissingFace) == "MissingFace");
  const Error e(ErrorKind::NotAnEdge, "step 3");
  CHECK(std::string(e.what()).find("step 3") != std::string::npos);
}
