#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "netdiag/csv.hpp"
#include "netdiag/errors.hpp"
#include "netdiag/rng.hpp"

using namespace netdiag;

namespace {

csv::Table parse(const std::string& text) {
  std::istringstream in(text);
  return csv::read(in);
}

}  // namespace

TEST_CASE("plain table parses") {
  const csv::Table t = parse("a,b\n1,2\n3,4\n");
  REQUIRE(t.header.size() == 2);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "1");
  CHECK(t.rows[1][1] == "4");
}

TEST_CASE("quoted fields carry commas, quotes, and newlines") {
  const csv::Table t = parse("a,b\n\"x,y\",\"he said \"\"hi\"\"\"\n\"l1\nl2\",z\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "x,y");
  CHECK(t.rows[0][1] == "he said \"hi\"");
  CHECK(t.rows[1][0] == "l1\nl2");
}

TEST_CASE("crlf endings and a leading BOM are tolerated") {
  const csv::Table t = parse("\xEF\xBB\xBFh1,h2\r\n1,2\r\n");
  CHECK(t.header[0] == "h1");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][1] == "2");
}

TEST_CASE("blank lines between records are skipped") {
  const csv::Table t = parse("a\n1\n\n\n2\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][0] == "2");
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(parse(""), Error);
  try {
    parse("");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyFile);
  }
}

TEST_CASE("duplicate and empty header names are rejected") {
  try {
    parse("a,a\n1,2\n");
    FAIL("expected MalformedHeader");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedHeader);
  }
  try {
    parse("a,\n1,2\n");
    FAIL("expected MalformedHeader");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedHeader);
  }
}

TEST_CASE("field count mismatches are rejected") {
  try {
    parse("a,b\n1,2\n3\n");
    FAIL("expected MalformedRecord");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedRecord);
    CHECK(e.message().find("expected 2 fields, got 1") != std::string::npos);
  }
}

TEST_CASE("stray and unterminated quotes are rejected") {
  CHECK_THROWS_AS(parse("a\nx\"y\n"), Error);
  CHECK_THROWS_AS(parse("a\n\"unterminated\n"), Error);
}

TEST_CASE("writer round-trips awkward fields") {
  csv::Table t;
  t.header = {"name", "note"};
  t.rows = {{"a,b", "quote \" here"}, {"line\nbreak", "plain"}, {"", " pad "}};
  std::ostringstream out;
  csv::write(out, t);
  const csv::Table back = parse(out.str());
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.header.size(); ++c)
      CHECK(back.rows[r][c] == t.rows[r][c]);
}

TEST_CASE("format_double round-trips random doubles exactly") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-6.0, 8.0));
    const auto back = csv::parse_double(csv::format_double(x));
    REQUIRE(back.has_value());
    CHECK(*back == x);
  }
  CHECK(csv::format_double(225.468) == "225.468");
  CHECK(csv::format_double(1.0) == "1");
}

TEST_CASE("parse_double is strict") {
  CHECK(csv::parse_double("1.5").value() == 1.5);
  CHECK(csv::parse_double("+1.5").value() == 1.5);
  CHECK(csv::parse_double("-2e3").value() == -2000.0);
  CHECK(!csv::parse_double("").has_value());
  CHECK(!csv::parse_double("1x").has_value());
  CHECK(!csv::parse_double("x1").has_value());
  CHECK(!csv::parse_double("nan").has_value());
  CHECK(!csv::parse_double("inf").has_value());
  CHECK(!csv::parse_double("1.5 ").has_value());
}
