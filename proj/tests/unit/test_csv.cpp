#include "doctest.h"

#include "socialdist/csv.hpp"
#include "socialdist/errors.hpp"

using namespace socialdist;

TEST_CASE("quoted fields, CRLF and BOM") {
  auto t = csv::parse("\xEF\xBB\xBF" "Image , x\r\n\"a,b.jpg\",\"1.5\"\r\n\"say \"\"hi\"\"\",2\n");
  REQUIRE(t.rows().size() == 2);
  CHECK(t.column("image") == 0u);
  CHECK(t.column("X") == 1u);
  CHECK(t.field(t.rows()[0], 0) == "a,b.jpg");
  CHECK(t.number(t.rows()[0], 1) == 1.5);
  CHECK(t.field(t.rows()[1], 0) == "say \"hi\"");
  CHECK(t.rows()[1].line == 3);
}

TEST_CASE("bad numbers report file and line") {
  auto t = csv::parse("a,b\n1,x\n", "f.csv");
  try {
    (void)t.number(t.rows()[0], 1);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.file() == "f.csv");
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(t.require_column("c"), ParseError);
}

TEST_CASE("blank lines are skipped and short rows read as empty") {
  auto t = csv::parse("a,b\n\n1\n");
  REQUIRE(t.rows().size() == 1);
  CHECK(t.field(t.rows()[0], 1).empty());
  CHECK_FALSE(t.optional_number(t.rows()[0], 1).has_value());
}

TEST_CASE("writer round trip") {
  csv::Writer w({"name", "value"});
  w.add_row({"x,y", csv::format_number(0.1)});
  w.add_row({"q\"", csv::format_number(1e21)});
  auto t = csv::parse(w.str());
  CHECK(t.field(t.rows()[0], 0) == "x,y");
  CHECK(t.number(t.rows()[0], 1) == 0.1);
  CHECK(t.field(t.rows()[1], 0) == "q\"");
  CHECK(t.number(t.rows()[1], 1) == 1e21);
  CHECK(csv::format_number(1200) == "1200");
}

TEST_CASE("missing file") { CHECK_THROWS_AS(csv::read_file("/nonexistent/x.csv"), MissingAnnotationFile); }
