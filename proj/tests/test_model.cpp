#include <doctest.h>

#include <algorithm>
#include <random>

#include "deniable/error.hpp"
#include "support/fixtures.hpp"

using namespace deniable;

namespace {

Schema state_schema() {
  AttributeDef state{"State", AttributeKind::Discrete, {Value("CA"), Value("NY"), Value("TX")}};
  AttributeDef zip{"Zip", AttributeKind::Discrete, {Value(1.0), Value(2.0), Value(3.0)}};
  AttributeDef salary{"Salary", AttributeKind::Continuous, {}, 0, 1000};
  return Schema("emp", {state, zip, salary});
}

}  // namespace

TEST_CASE("domain sizes") {
  const Schema s = state_schema();
  CHECK(domain_size(s.attribute(0)) == 3);
  CHECK(domain_size(s.attribute(2)) == 1000);
  AttributeDef flat{"X", AttributeKind::Continuous, {}, 200, 200};
  CHECK_THROWS_AS(flat.validate(), Error);
  CHECK_THROWS_AS(Schema("r", {flat}), Error);
}

TEST_CASE("schema rejects duplicate names and unknown lookups") {
  AttributeDef a{"A", AttributeKind::Discrete, {Value(1.0)}};
  CHECK_THROWS_AS(Schema("r", {a, a}), Error);
  const Schema s = state_schema();
  CHECK(s.find("Zip") == 1u);
  CHECK_FALSE(s.find("zip"));
  try {
    s.require("Nope");
    FAIL("expected UnknownAttribute");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownAttribute);
  }
}

TEST_CASE("instances count cells and reject out-of-domain values") {
  const Schema s = state_schema();
  RelationInstance two(s, {{Value("CA"), Value(1.0), Value(10.0)}, {Value("NY"), Value(2.0), Value(20.0)}});
  CHECK(two.tuples() == 2);
  CHECK(two.cell_count() == 6);
  try {
    RelationInstance bad(s, {{Value("XX"), Value(1.0), Value(10.0)}});
    FAIL("expected DomainViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DomainViolation);
  }
  CHECK_THROWS_AS(RelationInstance(s, {{Value("CA"), Value(1.0)}}), Error);
}

TEST_CASE("four-row tax-like relation addresses sixteen cells") {
  AttributeDef state{"State", AttributeKind::Discrete, {Value("CA"), Value("NY")}};
  AttributeDef zip{"Zip", AttributeKind::Discrete, {Value(1.0), Value(2.0)}};
  AttributeDef salary{"Salary", AttributeKind::Continuous, {}, 0, 1000};
  AttributeDef rate{"Rate", AttributeKind::Continuous, {}, 0, 1};
  const Schema s("tax", {state, zip, salary, rate});
  std::vector<std::vector<Value>> rows;
  for (int i = 0; i < 4; ++i) {
    rows.push_back({Value(i % 2 ? "NY" : "CA"), Value(1.0 + i % 2), Value(100.0 * i), Value(0.1 * i)});
  }
  RelationInstance inst(s, rows);
  CHECK(inst.cell_count() == 16);
  std::set<std::size_t> indices;
  for (std::uint32_t t = 0; t < 4; ++t) {
    for (std::uint32_t a = 0; a < 4; ++a) {
      indices.insert(inst.index({t, a}));
      CHECK(values_equal(inst.at({t, a}), rows[t][a]));
    }
  }
  CHECK(indices.size() == 16);
}

TEST_CASE("base view hides everything") {
  const Schema s = state_schema();
  auto inst = std::make_shared<const RelationInstance>(
      s, std::vector<std::vector<Value>>{{Value("CA"), Value(1.0), Value(1.0)}, {Value("NY"), Value(2.0), Value(2.0)}});
  const QuerierView base = base_view(inst);
  CHECK(base.hidden_count() == 6);
  for (CellRef c : base.hidden_cells()) CHECK(base.observe(c) == nullptr);

  auto empty = std::make_shared<const RelationInstance>(s, std::vector<std::vector<Value>>{});
  CHECK(base_view(empty).hidden_count() == 0);
}

TEST_CASE("views observe true values exactly where not hidden") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 20; ++round) {
    auto rc = fixtures::random_case(rng);
    const QuerierView v = fixtures::random_view(rng, rc.instance, 0.4);
    for (std::uint32_t t = 0; t < rc.instance->tuples(); ++t) {
      for (std::uint32_t a = 0; a < rc.instance->arity(); ++a) {
        const Value* seen = v.observe({t, a});
        if (v.is_hidden({t, a})) {
          CHECK(seen == nullptr);
        } else {
          REQUIRE(seen != nullptr);
          CHECK(values_equal(*seen, rc.instance->at(t, a)));
        }
      }
    }
    const auto hidden = v.hidden_cells();
    CHECK(v.with_revealed(hidden).hidden_count() == 0);
    CHECK(v.with_hidden(hidden) == v);
  }
}

TEST_CASE("sensitivity determination") {
  AttributeDef name{"EName", AttributeKind::Discrete, {Value("Carrie Sea"), Value("Bobby"), Value("Danny")}};
  AttributeDef sal{"SalPerHr", AttributeKind::Continuous, {}, 0, 1000};
  AttributeDef state{"State", AttributeKind::Discrete, {Value("CA"), Value("NY")}};
  const Schema s("Employee", {name, sal, state});
  RelationInstance inst(s, {{Value("Carrie Sea"), Value(50.0), Value("CA")},
                            {Value("Bobby"), Value(40.0), Value("CA")},
                            {Value("Carrie Sea"), Value(60.0), Value("NY")}});

  Policy carrie;
  carrie.querier = "John Doe";
  carrie.relation = "Employee";
  carrie.selection = {{"EName", CompareOp::Eq, Value("Carrie Sea")}};
  carrie.projection = {"SalPerHr"};

  SUBCASE("selection and projection") {
    const auto out = sensitivity_determination(std::vector<Policy>{carrie}, "John Doe", inst);
    CHECK(out.cells == std::set<CellRef>{{0, 1}, {2, 1}});
  }
  SUBCASE("other queriers are unaffected") {
    CHECK(sensitivity_determination(std::vector<Policy>{carrie}, "Jane", inst).cells.empty());
  }
  SUBCASE("empty policy list") {
    CHECK(sensitivity_determination(std::vector<Policy>{}, "John Doe", inst).cells.empty());
  }
  SUBCASE("overlapping policies union, independent of order") {
    Policy ca = carrie;
    ca.selection = {{"State", CompareOp::Eq, Value("CA")}};
    const auto ab = sensitivity_determination(std::vector<Policy>{carrie, ca}, "John Doe", inst);
    const auto ba = sensitivity_determination(std::vector<Policy>{ca, carrie}, "John Doe", inst);
    CHECK(ab.cells == ba.cells);
    CHECK(ab.cells == std::set<CellRef>{{0, 1}, {1, 1}, {2, 1}});
    const QuerierView base = base_view(std::make_shared<const RelationInstance>(inst));
    for (CellRef c : ab.cells) CHECK(base.is_hidden(c));
  }
  SUBCASE("allow policies hide nothing") {
    Policy allow = carrie;
    allow.action = PolicyAction::Allow;
    CHECK(sensitivity_determination(std::vector<Policy>{allow}, "John Doe", inst).cells.empty());
  }
  SUBCASE("direct cells") {
    Policy direct;
    direct.querier = "John Doe";
    direct.cells = std::vector<std::pair<std::size_t, std::string>>{{1, "State"}};
    CHECK(sensitivity_determination(std::vector<Policy>{direct}, "John Doe", inst).cells ==
          std::set<CellRef>{{1, 2}});
    direct.cells = std::vector<std::pair<std::size_t, std::string>>{{7, "State"}};
    CHECK_THROWS_AS(sensitivity_determination(std::vector<Policy>{direct}, "John Doe", inst), Error);
  }
}
