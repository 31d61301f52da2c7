#include <doctest.h>

#include <random>

#include "deniable/protect.hpp"
#include "support/fixtures.hpp"

using namespace deniable;

namespace {

constexpr CellRef a{0, 0}, b{0, 1}, c{0, 2}, d{0, 3};

Cueset cs(std::vector<CellRef> members, std::uint32_t i = 0) {
  return {{9, 9}, std::move(members), {DepKind::Dc, i, 0, 0}};
}

bool covers(const HideSelection& sel, const std::vector<Cueset>& cuesets) {
  return std::all_of(cuesets.begin(), cuesets.end(), [&](const Cueset& x) {
    return std::any_of(x.members.begin(), x.members.end(), [&](CellRef m) { return sel.cells.count(m) > 0; });
  });
}

}  // namespace

TEST_CASE("greedy cover examples") {
  CHECK(protect_mvc(std::vector<Cueset>{cs({a, b}), cs({b, c}), cs({d})}).cells == std::set<CellRef>{b, d});
  CHECK(protect_mvc(std::vector<Cueset>{cs({a})}).cells == std::set<CellRef>{a});
  CHECK(protect_mvc(std::vector<Cueset>{cs({a, b}), cs({a, b}), cs({b, c})}).cells == std::set<CellRef>{b});
  CHECK(protect_mvc(std::vector<Cueset>{}).cells.empty());
}

TEST_CASE("random protection") {
  const std::vector<Cueset> one{cs({a, b, c})};
  const auto first = protect_random(one, 7);
  CHECK(first.cells.size() == 1);
  CHECK(protect_random(one, 7).cells == first.cells);

  const std::vector<Cueset> overlap{cs({a}), cs({a, b})};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto sel = protect_random(overlap, seed);
    if (sel.covered_by[0] == a) {
      CHECK(sel.cells.size() <= 2);
    }
    CHECK(sel.cells.count(a) == 1);
  }
}

TEST_CASE("both strategies cover every cueset") {
  std::mt19937_64 rng(2);
  for (int round = 0; round < 200; ++round) {
    const auto batch = fixtures::random_cuesets(rng, 10, 1 + round % 15);
    CHECK(covers(protect_mvc(batch), batch));
    CHECK(covers(protect_random(batch, round), batch));
  }
}

TEST_CASE("greedy cover ignores input order") {
  std::mt19937_64 rng(4);
  for (int round = 0; round < 50; ++round) {
    auto batch = fixtures::random_cuesets(rng, 10, 12);
    const auto before = protect_mvc(batch).cells;
    std::shuffle(batch.begin(), batch.end(), rng);
    CHECK(protect_mvc(batch).cells == before);
  }
}

TEST_CASE("greedy cover stays within twice the optimum on small batches") {
  std::mt19937_64 rng(6);
  for (int round = 0; round < 100; ++round) {
    const auto batch = fixtures::random_cuesets(rng, 12, 4 + round % 20);
    CHECK(protect_mvc(batch).cells.size() <= 2 * fixtures::brute_force_min_cover(batch));
  }
}

TEST_CASE("random protection hides at least as much as greedy on a chain") {
  std::vector<Cueset> chain;
  for (std::uint32_t i = 0; i < 8; ++i) chain.push_back(cs({{0, i}, {0, i + 1}}, i));
  for (std::uint32_t i = 0; i < 4; ++i) chain.push_back(cs({{0, 4}, {1, i}}, 8 + i));
  const std::size_t greedy = protect_mvc(chain).cells.size();
  int worse_or_equal = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    if (protect_random(chain, seed).cells.size() >= greedy) ++worse_or_equal;
  }
  CHECK(worse_or_equal >= 95);
}

TEST_CASE("cloaking") {
  const Schema s = fixtures::small_schema(3, {2, 2, 2});
  HideSelection sel;
  sel.cells = {{3, 0}};
  const std::vector<std::string> cloak{"A2"};
  CHECK(protect_cloak(sel, cloak, s).cells == std::set<CellRef>{{3, 0}, {3, 2}});
  CHECK(protect_cloak(HideSelection{}, cloak, s).cells.empty());
  HideSelection already;
  already.cells = {{1, 2}};
  CHECK(protect_cloak(already, cloak, s).cells == std::set<CellRef>{{1, 2}});
  const std::vector<std::string> bad{"Nope"};
  CHECK_THROWS(protect_cloak(sel, bad, s));
}
