#include "deniable/protect.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace deniable {

namespace {

bool hits(const std::set<CellRef>& chosen, const Cueset& cs) {
  return std::any_of(cs.members.begin(), cs.members.end(),
                     [&](CellRef c) { return chosen.count(c) != 0; });
}

void fill_coverage(HideSelection& sel, std::span<const Cueset> cuesets) {
  sel.covered_by.clear();
  for (const auto& cs : cuesets) {
    CellRef by{};
    for (CellRef c : cs.members) {
      if (sel.cells.count(c)) {
        by = c;
        break;
      }
    }
    sel.covered_by.push_back(by);
  }
}

}  // namespace

HideSelection protect_random(std::span<const Cueset> cuesets, std::uint64_t seed) {
  HideSelection sel;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(cuesets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i : order) {
    const Cueset& cs = cuesets[i];
    if (cs.members.empty() || hits(sel.cells, cs)) continue;
    std::uniform_int_distribution<std::size_t> pick(0, cs.members.size() - 1);
    sel.cells.insert(cs.members[pick(rng)]);
  }
  fill_coverage(sel, cuesets);
  return sel;
}

HideSelection protect_mvc(std::span<const Cueset> cuesets) {
  HideSelection sel;
  std::map<CellRef, std::vector<std::size_t>> where;
  std::map<CellRef, std::size_t> freq;
  std::vector<std::uint8_t> covered(cuesets.size(), 0);
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < cuesets.size(); ++i) {
    if (cuesets[i].members.empty()) {
      covered[i] = 1;
      continue;
    }
    ++remaining;
    for (CellRef c : cuesets[i].members) {
      where[c].push_back(i);
      ++freq[c];
    }
  }
  // Buckets ordered by (frequency desc, cell asc); the first entry is the pick.
  auto cmp = [](const std::pair<std::size_t, CellRef>& a, const std::pair<std::size_t, CellRef>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::set<std::pair<std::size_t, CellRef>, decltype(cmp)> heap(cmp);
  for (const auto& [c, f] : freq) heap.insert({f, c});

  while (remaining > 0) {
    const auto [f, cell] = *heap.begin();
    heap.erase(heap.begin());
    sel.cells.insert(cell);
    for (std::size_t i : where[cell]) {
      if (covered[i]) continue;
      covered[i] = 1;
      --remaining;
      for (CellRef other : cuesets[i].members) {
        if (other == cell || sel.cells.count(other)) continue;
        auto& fo = freq[other];
        heap.erase({fo, other});
        --fo;
        if (fo > 0) heap.insert({fo, other});
      }
    }
  }
  fill_coverage(sel, cuesets);
  return sel;
}

HideSelection protect_cloak(HideSelection selection, std::span<const std::string> sensitive_attrs,
                            const Schema& schema) {
  std::vector<std::uint32_t> attrs;
  for (const auto& name : sensitive_attrs) attrs.push_back(static_cast<std::uint32_t>(schema.require(name)));
  std::set<std::uint32_t> tuples;
  for (CellRef c : selection.cells) tuples.insert(c.tuple);
  for (std::uint32_t t : tuples) {
    for (std::uint32_t a : attrs) selection.cells.insert({t, a});
  }
  return selection;
}

}  // namespace deniable
