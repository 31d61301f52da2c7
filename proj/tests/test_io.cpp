#include <doctest.h>

#include "deniable/error.hpp"
#include "deniable/io.hpp"
#include "support/fixtures.hpp"

using namespace deniable;

namespace {

const char* kSchema = R"({
  "relation": "emp",
  "owner_column": "owner",
  "attributes": [
    {"name": "Name", "kind": "discrete", "values": ["Ann", "Smith, Jo", "Say \"hi\""]},
    {"name": "Zip", "kind": "discrete", "values": [1, 2]},
    {"name": "Salary", "kind": "continuous", "range": [0, 1000], "bins": 10}
  ]
})";

}  // namespace

TEST_CASE("schema JSON round trip") {
  const Schema s = parse_schema(kSchema);
  CHECK(s.size() == 3);
  CHECK(s.owner_column() == std::optional<std::string>("owner"));
  CHECK(s.attribute(2).bins == 10);
  const Schema again = parse_schema(format_schema(s));
  CHECK(format_schema(again) == format_schema(s));
  CHECK_THROWS_AS(parse_schema("{"), Error);
  CHECK_THROWS_AS(parse_schema(R"({"relation":"r","attributes":[{"name":"A","kind":"weird"}]})"), Error);
}

TEST_CASE("CSV quoting") {
  const auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\r\n\"multi\nline\",x,\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(rows[1] == std::vector<std::string>{"multi\nline", "x", ""});
  CHECK(format_csv_field("plain") == "plain");
  CHECK(format_csv_field("a,b") == "\"a,b\"");
  CHECK(format_csv_field("q\"") == "\"q\"\"\"");
}

TEST_CASE("relations and views survive a write/read cycle") {
  const Schema s = parse_schema(kSchema);
  const std::string csv =
      "owner,Name,Zip,Salary\n"
      "u1,Ann,1,10\n"
      "u2,\"Smith, Jo\",2,20.5\n"
      "u1,\"Say \"\"hi\"\"\",1,30\n";
  const RelationInstance inst = load_relation(csv, s);
  CHECK(inst.tuples() == 3);
  CHECK(inst.owner(1) == "u2");
  CHECK(std::get<std::string>(inst.at(1, 0)) == "Smith, Jo");
  CHECK(std::get<double>(inst.at(1, 2)) == doctest::Approx(20.5));

  const RelationInstance again = load_relation(format_relation(inst), s);
  CHECK(format_relation(again) == format_relation(inst));

  auto ptr = std::make_shared<const RelationInstance>(inst);
  const QuerierView v = make_view(ptr, {{0, 1}, {2, 0}});
  const std::string text = format_view(v);
  CHECK(text.find("\\N") != std::string::npos);
  CHECK(load_view(text, ptr) == v);
}

TEST_CASE("loading rejects malformed input") {
  const Schema s = parse_schema(kSchema);
  CHECK_THROWS_AS(load_relation("owner,Zip,Name,Salary\nu,1,Ann,1\n", s), Error);
  CHECK_THROWS_AS(load_relation("owner,Name,Zip,Salary\nu,Bob,1,1\n", s), Error);
  CHECK_THROWS_AS(load_relation("owner,Name,Zip,Salary\nu,Ann,1\n", s), Error);
  auto inst = std::make_shared<const RelationInstance>(load_relation("owner,Name,Zip,Salary\nu,Ann,1,5\n", s));
  try {
    load_view("owner,Name,Zip,Salary\nu,Ann,2,5\n", inst);
    FAIL("expected InvalidInstance");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidInstance);
  }
  CHECK_THROWS_AS(read_file("/nonexistent/file.csv"), Error);
}

TEST_CASE("policy files") {
  const auto realistic = parse_policies(R"([{"querier":"John Doe","relation":"Employee",
      "selection":[{"attr":"EName","op":"=","value":"Carrie Sea"},{"attr":"Age","op":">=","value":30}],
      "projection":["SalPerHr"],"action":"deny"}])");
  REQUIRE(realistic.size() == 1);
  CHECK(realistic[0].querier == "John Doe");
  REQUIRE(realistic[0].selection.size() == 2);
  CHECK(realistic[0].selection[1].op == CompareOp::Ge);
  CHECK(std::get<double>(realistic[0].selection[1].value) == 30);
  CHECK(realistic[0].action == PolicyAction::Deny);

  const auto direct = parse_policies(R"({"querier":"Q","cells":[[0,"Zip"],[2,"Name"]]})");
  REQUIRE(direct.size() == 1);
  REQUIRE(direct[0].cells);
  CHECK(direct[0].cells->size() == 2);
  CHECK((*direct[0].cells)[1] == std::pair<std::size_t, std::string>{2, "Name"});

  CHECK_THROWS_AS(parse_policies(R"([{"cells":[[0,"Zip"]]}])"), Error);
  CHECK_THROWS_AS(parse_policies(R"([{"querier":"Q","selection":[{"attr":"A","op":"~","value":1}]}])"), Error);
}
