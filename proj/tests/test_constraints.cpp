#include <doctest.h>

#include <random>

#include "deniable/error.hpp"
#include "support/fixtures.hpp"

using namespace deniable;

namespace {

Schema wages_schema() {
  AttributeDef wh{"WorkHrs", AttributeKind::Continuous, {}, 0, 100};
  AttributeDef sp{"SalPerHr", AttributeKind::Continuous, {}, 0, 1000};
  AttributeDef sal{"Salary", AttributeKind::Continuous, {}, 0, 100000};
  return Schema("wages", {wh, sp, sal});
}

std::size_t error_column(std::string_view text) {
  try {
    parse_constraints(text);
  } catch (const ParseError& e) {
    return e.column();
  }
  return 0;
}

}  // namespace

TEST_CASE("denial and function constraint syntax") {
  const auto deps = parse_constraints("dc: !(t1.Zip == t2.Zip & t1.State != t2.State)\n");
  REQUIRE(deps.dcs.size() == 1);
  CHECK(deps.dcs[0].arity == 2);
  CHECK(deps.dcs[0].predicates.size() == 2);
  CHECK(deps.dcs[0].id == "dc1");

  const auto fc = parse_constraints("fc: t1.Salary = fn(t1.WorkHrs, t1.SalPerHr) invertible");
  REQUIRE(fc.fcs.size() == 1);
  CHECK(fc.fcs[0].inputs == std::vector<std::string>{"WorkHrs", "SalPerHr"});
  CHECK(fc.fcs[0].invertible);
  CHECK_FALSE(parse_constraints("fc:f: t1.Y = fn(t1.X) noninvertible").fcs[0].invertible);

  const auto lit = parse_constraints("dc:rate: !(t1.Rate > 0.4)\ndc:s: !(t1.State == \"CA\" & t1.Zip != t2.Zip)");
  CHECK(lit.dcs[0].arity == 1);
  CHECK(lit.dcs[0].id == "rate");
  CHECK(std::get<double>(lit.dcs[0].predicates[0].rhs.literal) == doctest::Approx(0.4));
  CHECK(std::get<std::string>(lit.dcs[1].predicates[0].rhs.literal) == "CA");
}

TEST_CASE("malformed constraints") {
  try {
    parse_constraints("dc: !(t1.State == t1.State)");
    FAIL("expected TrivialPredicate");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TrivialPredicate);
  }
  CHECK_THROWS_AS(parse_constraints("dc:a: !(t1.A == t2.A)\ndc:a: !(t1.B == t2.B)"), Error);
  CHECK_THROWS_AS(parse_constraints("dc: !(t1.A === t2.A)"), ParseError);
  CHECK_THROWS_AS(parse_constraints("dc: !(t1.A == t2.A"), ParseError);
  CHECK_THROWS_AS(parse_constraints("dc: !(3 == 4)"), ParseError);
  CHECK_THROWS_AS(parse_constraints("fc: t1.A = fn(t1.A) invertible"), Error);
  CHECK_THROWS_AS(parse_constraints("fc: t1.A = fn(t1.B)"), ParseError);
  CHECK(error_column("dc: !(t1.A == t2.A & t1.B ?? t2.B)") > 20);

  const Schema s = wages_schema();
  CHECK_THROWS_AS(parse_constraints("dc: !(t1.Nope == t2.Nope)", s), Error);
}

TEST_CASE("formatting canonicalizes whitespace") {
  const auto tight = parse_constraints("dc:!( t1.A==t2.A )");
  const auto spaced = parse_constraints("dc:   !(  t1.A   ==   t2.A  )   # note");
  CHECK(format_constraints(tight) == format_constraints(spaced));
}

TEST_CASE("golden dependency lists parse, round-trip and hold on their fixtures") {
  for (const std::string stem : {"golden/tax", "golden/hospital"}) {
    CAPTURE(stem);
    const auto l = fixtures::load_fixture(stem);
    CHECK(parse_constraints(format_constraints(l.deps), l.schema) == l.deps);
    for (const auto& dc : l.deps.dcs) {
      CHECK(parse_constraints(format_constraint(dc), l.schema).dcs.at(0) == dc);
    }
    CHECK(validate_instance(*l.instance, l.deps).empty());
  }
  CHECK(fixtures::load_fixture("golden/tax").deps.dcs.size() == 10);
  CHECK(fixtures::load_fixture("golden/tax").deps.fcs.size() == 1);
  CHECK(fixtures::load_fixture("golden/hospital").deps.dcs.size() == 14);
}

TEST_CASE("parse after format is the identity on random constraint sets") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    fixtures::RandomLimits lim;
    lim.allow_unary = true;
    const auto rc = fixtures::random_case(rng, lim);
    CHECK(parse_constraints(format_constraints(rc.deps), rc.schema) == rc.deps);
  }
}

TEST_CASE("validate_instance") {
  AttributeDef state{"State", AttributeKind::Discrete, {Value("CA"), Value("NY")}};
  AttributeDef role{"Role", AttributeKind::Discrete, {Value("Faculty"), Value("Staff")}};
  AttributeDef sal{"SalPerHr", AttributeKind::Continuous, {}, 0, 1000};
  const Schema s("emp", {state, role, sal});
  const auto pay = parse_constraints("dc: !(t1.State == t2.State & t1.Role == t2.Role & t1.SalPerHr > t2.SalPerHr)", s);
  RelationInstance two(s, {{Value("CA"), Value("Faculty"), Value(200.0)}, {Value("CA"), Value("Faculty"), Value(250.0)}});
  const auto v = validate_instance(two, pay);
  REQUIRE(v.size() == 1);
  CHECK(v[0].tuples == std::vector<std::size_t>{1, 0});

  RelationInstance none(s, {});
  CHECK(validate_instance(none, pay).empty());

  const auto fd = parse_constraints("dc: !(t1.State == t2.State & t1.Role != t2.Role)", s);
  RelationInstance clash(s, {{Value("CA"), Value("Faculty"), Value(1.0)}, {Value("CA"), Value("Staff"), Value(1.0)}});
  const auto sym = validate_instance(clash, fd);
  REQUIRE(sym.size() == 1);
  CHECK(sym[0].tuples == std::vector<std::size_t>{0, 1});

  const Schema w = wages_schema();
  const auto salary = parse_constraints("fc: t1.Salary = fn(t1.WorkHrs, t1.SalPerHr) invertible", w);
  CHECK(validate_instance(RelationInstance(w, {{Value(20.0), Value(40.0), Value(800.0)}}), salary).empty());
  CHECK(validate_instance(RelationInstance(w, {{Value(20.0), Value(40.0), Value(900.0)}}), salary).size() == 1);
}

TEST_CASE("function constraints instantiate as one-tuple denial constraints") {
  const Schema w = wages_schema();
  const auto deps = parse_constraints("fc: t1.Salary = fn(t1.WorkHrs, t1.SalPerHr) invertible", w);
  RelationInstance inst(w, {{Value(20.0), Value(40.0), Value(800.0)}});
  const auto g = fc_instantiate(deps.fcs[0], 0, 0, inst);
  REQUIRE(g.predicates.size() == 3);
  CHECK(g.predicates[0].lhs.cell == CellRef{0, 0});
  CHECK(g.predicates[0].op == CompareOp::Eq);
  CHECK(std::get<double>(g.predicates[0].rhs.literal) == 20);
  CHECK(g.predicates[1].lhs.cell == CellRef{0, 1});
  CHECK(std::get<double>(g.predicates[1].rhs.literal) == 40);
  CHECK(g.predicates[2].lhs.cell == CellRef{0, 2});
  CHECK(g.predicates[2].op == CompareOp::Ne);
  CHECK(std::get<double>(g.predicates[2].rhs.literal) == 800);
  REQUIRE(g.fc);
  CHECK(g.fc->output == CellRef{0, 2});

  AttributeDef x{"x", AttributeKind::Continuous, {}, 0, 10};
  AttributeDef y{"y", AttributeKind::Continuous, {}, 0, 10};
  const Schema xy("r", {x, y});
  const auto one = parse_constraints("fc: t1.y = fn(t1.x) invertible", xy);
  const auto h = fc_instantiate(one.fcs[0], 0, 0, RelationInstance(xy, {{Value(5.0), Value(5.0)}}));
  REQUIRE(h.predicates.size() == 2);
  CHECK(h.predicates[1].op == CompareOp::Ne);
  CHECK(std::get<double>(h.predicates[1].rhs.literal) == 5);
}

TEST_CASE("function constraint instantiations hold on their own tuple") {
  const auto l = fixtures::load_fixture("golden/tax");
  for (std::uint32_t t = 0; t < l.instance->tuples(); ++t) {
    const auto g = fc_instantiate(l.deps.fcs[0], 0, t, *l.instance);
    const bool all_true = std::all_of(g.predicates.begin(), g.predicates.end(), [&](const GroundPredicate& p) {
      return compare(l.instance->at(p.lhs.cell), p.op, p.rhs.literal);
    });
    CHECK_FALSE(all_true);
    const CellRef out = g.fc->output;
    for (std::size_t i = 0; i + 1 < g.predicates.size(); ++i) CHECK_FALSE(g.predicates[i].mentions(out));
    CHECK(g.predicates.back().mentions(out));
  }
}
