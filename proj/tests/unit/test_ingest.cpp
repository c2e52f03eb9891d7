#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "mouseauth/error.hpp"
#include "mouseauth/ingest.hpp"
#include "mouseauth/rng.hpp"

using namespace mouseauth;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIoError;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mouseauth_ingest_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("parse_session reads a simple header file") {
  const auto parsed = parse_session("t,x,y\n0,0,0\n0.008,3,4\n0.016,6,8", SchemaMap{}, "u", "s");
  REQUIRE(parsed.session.events.size() == 3);
  CHECK(parsed.session.events[1].x == 3.0);
  CHECK(parsed.session.events[2].y == 8.0);
  CHECK(parsed.report.dropped() == 0);
}

TEST_CASE("malformed rows are dropped and counted") {
  const auto parsed = parse_session("t,x,y\n0,0,0\n0.01,abc,4\n0.02,6,8\n", SchemaMap{}, "u", "s");
  CHECK(parsed.session.events.size() == 2);
  CHECK(parsed.report.dropped_malformed == 1);
  CHECK(parsed.report.data_rows == 3);
}

TEST_CASE("header-only file is an empty session") {
  CHECK(code_of([] { parse_session("t,x,y\n", SchemaMap{}, "u", "s"); }) ==
        ErrorCode::kEmptySession);
}

TEST_CASE("missing column is a schema error") {
  SchemaMap schema;
  schema.x_col = "posx";
  CHECK(code_of([&] { parse_session("t,x,y\n0,1,2\n", schema, "u", "s"); }) ==
        ErrorCode::kSchemaError);
}

TEST_CASE("schema columns must be distinct") {
  SchemaMap schema;
  schema.y_col = "x";
  CHECK(code_of([&] { schema.validate(); }) == ErrorCode::kSchemaError);
}

TEST_CASE("balabit preset reads client timestamp and state") {
  const std::string text =
      "record timestamp,client timestamp,button,state,x,y\n"
      "0.0,0.0,NoButton,Move,100,200\n"
      "0.1,0.016,NoButton,Move,103,204\n";
  const auto parsed = parse_session(text, SchemaMap::balabit(), "7", "session_1");
  REQUIRE(parsed.session.events.size() == 2);
  CHECK(parsed.session.events[1].t == doctest::Approx(0.016));
  CHECK(parsed.session.events[1].state.value() == "Move");
}

TEST_CASE("dfl preset scales millisecond timestamps") {
  const std::string text = "client timestamp,button,state,x,y\n1000,NoButton,Move,1,1\n1016,NoButton,Move,2,2\n";
  const auto parsed = parse_session(text, SchemaMap::dfl(), "User1", "s");
  CHECK(parsed.session.events[1].t == doctest::Approx(1.016));
}

TEST_CASE("headerless schema uses column indices") {
  SchemaMap schema;
  schema.has_header = false;
  schema.timestamp_col = "0";
  schema.x_col = "2";
  schema.y_col = "1";
  schema.delimiter = ';';
  const auto parsed = parse_session("0;5;7\n1;6;9\n", schema, "u", "s");
  CHECK(parsed.session.events[1].x == 9.0);
  CHECK(parsed.session.events[1].y == 6.0);
}

TEST_CASE("out-of-order rows are dropped, duplicates kept") {
  const auto parsed =
      parse_session("t,x,y\n0,0,0\n2,1,1\n1,5,5\n2,2,2\n3,3,3\n", SchemaMap{}, "u", "s");
  CHECK(parsed.session.events.size() == 4);
  CHECK(parsed.report.dropped_out_of_order == 1);
}

TEST_CASE("property: shuffled rows give monotone sessions and exact bookkeeping") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + rng.below(60);
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < rows; ++i) {
      std::string t = std::to_string(static_cast<double>(i) * 0.01);
      if (rng.uniform() < 0.1) t = "nan?";
      lines.push_back(t + "," + std::to_string(rng.uniform(0, 100)) + "," +
                      std::to_string(rng.uniform(0, 100)));
    }
    rng.shuffle(std::span<std::string>(lines));
    std::string text = "t,x,y\n";
    for (const auto& l : lines) text += l + "\n";
    try {
      const auto a = parse_session(text, SchemaMap{}, "u", "s");
      const auto b = parse_session(text, SchemaMap{}, "u", "s");
      CHECK(a.report.dropped() + a.session.events.size() == rows);
      CHECK(a.session.events.size() == b.session.events.size());
      for (std::size_t i = 0; i < a.session.events.size(); ++i) {
        CHECK(a.session.events[i].t == b.session.events[i].t);
        CHECK(a.session.events[i].x == b.session.events[i].x);
        if (i > 0) CHECK(a.session.events[i].t >= a.session.events[i - 1].t);
      }
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptySession);
    }
  }
}

TEST_CASE("load_user keeps order and reports empty files") {
  const auto dir = scratch_dir("load");
  write(dir / "a.csv", "t,x,y\n0,0,0\n1,1,1\n");
  write(dir / "b.csv", "t,x,y\n");
  write(dir / "c.csv", "t,x,y\n0,0,0\n");
  const auto load = load_user({dir / "c.csv", dir / "b.csv", dir / "a.csv"}, SchemaMap{}, "u");
  REQUIRE(load.sessions.size() == 2);
  CHECK(load.sessions[0].session_id == "c");
  CHECK(load.sessions[1].session_id == "a");
  REQUIRE(load.skipped.size() == 1);
  CHECK(load.skipped[0].file.ends_with("b.csv"));
  CHECK(code_of([] { load_user({}, SchemaMap{}, "u"); }) == ErrorCode::kNoSessions);
  CHECK(code_of([&] { load_user({dir / "b.csv"}, SchemaMap{}, "u"); }) ==
        ErrorCode::kNoSessions);
}
