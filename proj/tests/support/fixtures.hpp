#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "deniable/constraints.hpp"
#include "deniable/detect.hpp"
#include "deniable/io.hpp"
#include "deniable/model.hpp"

namespace fixtures {

using namespace deniable;

inline std::string data_path(const std::string& rel) { return std::string(DENIABLE_DATA_DIR) + "/" + rel; }

struct Loaded {
  Schema schema;
  DependencySet deps;
  std::shared_ptr<const RelationInstance> instance;
};

// `stem` names data/<stem>.csv, data/<stem>_schema.json and data/<stem>.dc.
inline Loaded load_fixture(const std::string& stem) {
  Loaded l;
  l.schema = parse_schema(read_file(data_path(stem + "_schema.json")));
  l.deps = parse_constraints(read_file(data_path(stem + ".dc")), l.schema);
  l.instance = std::make_shared<const RelationInstance>(load_relation(read_file(data_path(stem + ".csv")), l.schema));
  return l;
}

inline Schema small_schema(std::size_t attrs, const std::vector<std::size_t>& domain_sizes) {
  std::vector<AttributeDef> defs;
  for (std::size_t a = 0; a < attrs; ++a) {
    AttributeDef d;
    d.name = "A" + std::to_string(a);
    for (std::size_t v = 0; v < domain_sizes[a]; ++v) d.values.emplace_back(static_cast<double>(v));
    defs.push_back(std::move(d));
  }
  return Schema("r", std::move(defs));
}

inline std::shared_ptr<const RelationInstance> make_instance(const Schema& schema,
                                                             const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<Value>> values;
  for (const auto& r : rows) values.emplace_back(r.begin(), r.end());
  return std::make_shared<const RelationInstance>(schema, std::move(values));
}

struct RandomCase {
  Schema schema;
  DependencySet deps;
  std::shared_ptr<const RelationInstance> instance;
  std::set<CellRef> sensitive;
};

struct RandomLimits {
  std::size_t max_tuples = 5;
  std::size_t max_attrs = 4;
  std::size_t max_domain = 4;
  std::size_t max_dcs = 3;
  std::size_t max_sensitive = 2;
  bool allow_unary = false;
};

// Random discrete instance plus binary constraints it satisfies. Constraints
// compare the same attribute across the two tuples with =, !=, < or >.
inline RandomCase random_case(std::mt19937_64& rng, const RandomLimits& lim = {}) {
  const auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  RandomCase rc;
  const std::size_t n_attr = pick(2, lim.max_attrs);
  std::vector<std::size_t> dom(n_attr);
  for (auto& d : dom) d = pick(2, lim.max_domain);
  rc.schema = small_schema(n_attr, dom);
  const std::size_t n = pick(2, lim.max_tuples);
  std::vector<std::vector<double>> rows(n, std::vector<double>(n_attr));
  for (auto& r : rows) {
    for (std::size_t a = 0; a < n_attr; ++a) r[a] = static_cast<double>(pick(0, dom[a] - 1));
  }
  rc.instance = make_instance(rc.schema, rows);

  static constexpr CompareOp kOps[] = {CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Gt};
  const std::size_t want = pick(1, lim.max_dcs);
  for (int tries = 0; tries < 400 && rc.deps.dcs.size() < want; ++tries) {
    DenialConstraint dc;
    dc.id = "dc" + std::to_string(rc.deps.dcs.size() + 1);
    dc.arity = lim.allow_unary && pick(0, 4) == 0 ? 1 : 2;
    const std::size_t preds = pick(1, std::min<std::size_t>(3, n_attr));
    std::vector<std::size_t> attrs(n_attr);
    for (std::size_t a = 0; a < n_attr; ++a) attrs[a] = a;
    std::shuffle(attrs.begin(), attrs.end(), rng);
    for (std::size_t p = 0; p < preds; ++p) {
      const std::size_t a = attrs[p];
      const std::string name = rc.schema.attribute(a).name;
      Predicate pr;
      pr.op = kOps[pick(0, 3)];
      pr.lhs = Operand::attr(Slot::T1, name, a);
      if (dc.arity == 1) {
        pr.rhs = Operand::constant(static_cast<double>(pick(0, dom[a] - 1)));
      } else {
        pr.rhs = Operand::attr(Slot::T2, name, a);
      }
      dc.predicates.push_back(std::move(pr));
    }
    DependencySet one;
    one.dcs.push_back(dc);
    if (validate_instance(*rc.instance, one).empty()) rc.deps.dcs.push_back(std::move(dc));
  }

  const std::size_t s = pick(1, lim.max_sensitive);
  while (rc.sensitive.size() < s) {
    rc.sensitive.insert(CellRef{static_cast<std::uint32_t>(pick(0, n - 1)), static_cast<std::uint32_t>(pick(0, n_attr - 1))});
  }
  return rc;
}

// Random view over an instance: each cell hidden with probability p.
inline QuerierView random_view(std::mt19937_64& rng, std::shared_ptr<const RelationInstance> inst, double p) {
  std::bernoulli_distribution hide(p);
  std::set<CellRef> hidden;
  for (std::uint32_t t = 0; t < inst->tuples(); ++t) {
    for (std::uint32_t a = 0; a < inst->arity(); ++a) {
      if (hide(rng)) hidden.insert({t, a});
    }
  }
  return make_view(std::move(inst), hidden);
}

// Cuesets over cells {(0,0) .. (0,cells-1)}.
inline std::vector<Cueset> random_cuesets(std::mt19937_64& rng, std::size_t cells, std::size_t count) {
  std::uniform_int_distribution<std::uint32_t> cell(0, static_cast<std::uint32_t>(cells - 1));
  std::uniform_int_distribution<std::size_t> size(1, 4);
  std::vector<Cueset> out;
  for (std::size_t i = 0; i < count; ++i) {
    Cueset cs;
    cs.owner = {99, 0};
    std::set<CellRef> members;
    const std::size_t k = size(rng);
    while (members.size() < k) members.insert({0, cell(rng)});
    cs.members.assign(members.begin(), members.end());
    cs.origin = {DepKind::Dc, static_cast<std::uint32_t>(i), 0, 0};
    out.push_back(std::move(cs));
  }
  return out;
}

// Exact minimum hitting set by subset enumeration over the distinct members.
inline std::size_t brute_force_min_cover(const std::vector<Cueset>& cuesets) {
  std::vector<CellRef> universe;
  for (const auto& cs : cuesets) universe.insert(universe.end(), cs.members.begin(), cs.members.end());
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
  std::vector<std::uint32_t> masks;
  for (const auto& cs : cuesets) {
    std::uint32_t m = 0;
    for (CellRef c : cs.members) {
      m |= 1u << (std::lower_bound(universe.begin(), universe.end(), c) - universe.begin());
    }
    masks.push_back(m);
  }
  std::size_t best = universe.size();
  for (std::uint32_t pickset = 0; pickset < (1u << universe.size()); ++pickset) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(pickset));
    if (size >= best) continue;
    if (std::all_of(masks.begin(), masks.end(), [&](std::uint32_t m) { return (m & pickset) != 0; })) best = size;
  }
  return best;
}

// Canonical multiset key for comparing detections.
inline std::multiset<std::string> cueset_keys(const Detection& d) {
  std::multiset<std::string> keys;
  for (const auto& cs : d.cuesets) {
    std::string k = to_string(cs.owner) + "|" + std::to_string(static_cast<int>(cs.origin.kind)) + ":" +
                    std::to_string(cs.origin.index) + ":" + std::to_string(cs.origin.t1) + ":" +
                    std::to_string(cs.origin.t2) + "|";
    for (CellRef m : cs.members) k += to_string(m);
    keys.insert(std::move(k));
  }
  return keys;
}

}  // namespace fixtures
