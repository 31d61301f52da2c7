#include "deniable/verify.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <random>

#include "deniable/error.hpp"

namespace deniable {

std::uint64_t default_oracle_budget() {
  if (const char* env = std::getenv("TT_ORACLE_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 10'000'000ULL;
}

// ---- grounding ----------------------------------------------------------------

namespace {

GroundOperand bind(const Operand& o, std::uint32_t t1, std::uint32_t t2) {
  if (!o.is_attr()) return {false, {}, o.literal};
  return {true, {o.slot == Slot::T1 ? t1 : t2, static_cast<std::uint32_t>(o.attr_index)}, {}};
}

GroundOperand cell_op(CellRef c) { return {true, c, {}}; }
GroundOperand const_op(const Value& v) { return {false, {}, v}; }

bool touches(const std::vector<GroundPredicate>& preds, CellRef c) {
  return std::any_of(preds.begin(), preds.end(), [&](const GroundPredicate& p) { return p.mentions(c); });
}

}  // namespace

std::vector<OracleConstraint> oracle_constraints(const DependencySet& deps, CellRef cell,
                                                 const RelationInstance& instance) {
  std::vector<OracleConstraint> out;
  const auto n = static_cast<std::uint32_t>(instance.tuples());
  for (const auto& dc : deps.dcs) {
    const auto add = [&](std::uint32_t t1, std::uint32_t t2) {
      OracleConstraint oc;
      for (const auto& p : dc.predicates) oc.predicates.push_back({bind(p.lhs, t1, t2), p.op, bind(p.rhs, t1, t2)});
      if (!touches(oc.predicates, cell)) return;
      oc.label = dc.id + "(" + std::to_string(t1) + "," + std::to_string(t2) + ")";
      out.push_back(std::move(oc));
    };
    if (dc.arity == 1) {
      add(cell.tuple, cell.tuple);
      continue;
    }
    for (std::uint32_t u = 0; u < n; ++u) {
      if (u == cell.tuple) continue;
      add(cell.tuple, u);
      add(u, cell.tuple);
    }
  }
  for (const auto& fc : deps.fcs) {
    const std::uint32_t t = cell.tuple;
    const CellRef out_cell{t, static_cast<std::uint32_t>(fc.output_index)};
    std::vector<CellRef> ins;
    for (std::size_t a : fc.input_indices) ins.push_back({t, static_cast<std::uint32_t>(a)});
    if (cell != out_cell && std::find(ins.begin(), ins.end(), cell) == ins.end()) continue;

    OracleConstraint forward{fc.id + "(" + std::to_string(t) + ")", {}};
    for (CellRef c : ins) forward.predicates.push_back({cell_op(c), CompareOp::Eq, const_op(instance.at(c))});
    forward.predicates.push_back({cell_op(out_cell), CompareOp::Ne, const_op(instance.at(out_cell))});
    out.push_back(std::move(forward));
    if (!fc.invertible) continue;
    for (CellRef solved : ins) {
      if (solved != cell) continue;
      OracleConstraint inverse{fc.id + "^-1(" + std::to_string(t) + ")", {}};
      inverse.predicates.push_back({cell_op(out_cell), CompareOp::Eq, const_op(instance.at(out_cell))});
      for (CellRef c : ins) {
        if (c != solved) inverse.predicates.push_back({cell_op(c), CompareOp::Eq, const_op(instance.at(c))});
      }
      inverse.predicates.push_back({cell_op(solved), CompareOp::Ne, const_op(instance.at(solved))});
      out.push_back(std::move(inverse));
    }
  }
  return out;
}

std::vector<Value> oracle_candidates(const RelationInstance& instance, CellRef cell) {
  const AttributeDef& attr = instance.schema().attribute(cell.attribute);
  std::vector<Value> out;
  if (attr.is_discrete()) {
    out = attr.values;
  } else {
    const std::size_t bins = std::max<std::size_t>(attr.bins, 1);
    for (std::size_t i = 0; i <= bins; ++i) {
      out.emplace_back(attr.min + (attr.max - attr.min) * static_cast<double>(i) / static_cast<double>(bins));
    }
    const Value& truth = instance.at(cell);
    if (std::none_of(out.begin(), out.end(), [&](const Value& v) { return values_equal(v, truth); })) {
      out.push_back(truth);
    }
  }
  std::sort(out.begin(), out.end(), value_less);
  return out;
}

// ---- enumeration --------------------------------------------------------------

namespace {

struct Assignment {
  CellRef target;
  const Value* target_value;
  const std::vector<CellRef>* free_cells;
  std::vector<const Value*> free_values;
  const QuerierView* view;

  const Value* lookup(CellRef c) const {
    if (c == target) return target_value;
    for (std::size_t i = 0; i < free_cells->size(); ++i) {
      if ((*free_cells)[i] == c) return free_values[i];
    }
    return view->observe(c);
  }
};

bool holds(const OracleConstraint& oc, const Assignment& a) {
  for (const auto& p : oc.predicates) {
    const Value* l = p.lhs.is_cell ? a.lookup(p.lhs.cell) : &p.lhs.literal;
    const Value* r = p.rhs.is_cell ? a.lookup(p.rhs.cell) : &p.rhs.literal;
    if (!compare(*l, p.op, *r)) return true;  // some conjunct fails, so the negation holds
  }
  return false;
}

}  // namespace

std::vector<Value> oracle_inferred_set(CellRef cell, const QuerierView& view,
                                       std::span<const OracleConstraint> constraints,
                                       std::uint64_t budget) {
  const RelationInstance& inst = view.instance();
  std::vector<Value> result = oracle_candidates(inst, cell);
  std::map<CellRef, std::vector<Value>> domains;
  std::uint64_t spent = 0;

  for (const auto& oc : constraints) {
    // Hidden cells other than the target that the constraint reads.
    std::vector<CellRef> free_cells;
    bool settled = false;
    for (const auto& p : oc.predicates) {
      bool mentions_free = false;
      for (const GroundOperand* o : {&p.lhs, &p.rhs}) {
        if (!o->is_cell || o->cell == cell) continue;
        if (view.is_hidden(o->cell)) {
          mentions_free = true;
          if (std::find(free_cells.begin(), free_cells.end(), o->cell) == free_cells.end()) {
            free_cells.push_back(o->cell);
          }
        }
      }
      // A fully visible conjunct that is already false satisfies the constraint for any x.
      if (!mentions_free && !p.mentions(cell)) {
        const Value* l = p.lhs.is_cell ? view.observe(p.lhs.cell) : &p.lhs.literal;
        const Value* r = p.rhs.is_cell ? view.observe(p.rhs.cell) : &p.rhs.literal;
        if (!compare(*l, p.op, *r)) settled = true;
      }
    }
    if (settled) continue;

    std::vector<const std::vector<Value>*> doms;
    for (CellRef c : free_cells) {
      auto it = domains.find(c);
      if (it == domains.end()) it = domains.emplace(c, oracle_candidates(inst, c)).first;
      doms.push_back(&it->second);
    }

    std::vector<Value> kept;
    for (const Value& x : result) {
      Assignment a{cell, &x, &free_cells, std::vector<const Value*>(free_cells.size()), &view};
      std::vector<std::size_t> odo(free_cells.size(), 0);
      bool found = false;
      while (true) {
        for (std::size_t i = 0; i < odo.size(); ++i) a.free_values[i] = &(*doms[i])[odo[i]];
        if (++spent > budget) {
          throw Error(Errc::DomainTooLarge, "oracle budget of " + std::to_string(budget) +
                                                " assignments exhausted at cell " + to_string(cell) +
                                                "; raise TT_ORACLE_BUDGET or shrink the input");
        }
        if (holds(oc, a)) {
          found = true;
          break;
        }
        bool done = true;
        for (std::size_t i = odo.size(); i-- > 0;) {
          if (++odo[i] < doms[i]->size()) {
            done = false;
            break;
          }
          odo[i] = 0;
        }
        if (done) break;
      }
      if (found) kept.push_back(x);
    }
    result = std::move(kept);
    if (result.empty()) break;
  }
  return result;
}

bool OracleResult::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const OracleEntry& e) { return e.equal; });
}

std::vector<CellRef> OracleResult::failures() const {
  std::vector<CellRef> out;
  for (const auto& e : entries) {
    if (!e.equal) out.push_back(e.cell);
  }
  return out;
}

OracleResult check_full_deniability(const RelationInstance& instance, const DependencySet& deps,
                                    const std::set<CellRef>& sensitive, const QuerierView& view,
                                    std::uint64_t budget) {
  OracleResult result;
  const QuerierView base = base_view(view.instance_ptr());
  for (CellRef c : sensitive) {
    const auto constraints = oracle_constraints(deps, c, instance);
    OracleEntry e;
    e.cell = c;
    if (!view.is_hidden(c)) {
      // A released sensitive cell is known exactly.
      e.under_view = {instance.at(c)};
    } else {
      e.under_view = oracle_inferred_set(c, view, constraints, budget);
    }
    e.under_base = oracle_inferred_set(c, base, constraints, budget);
    e.equal = e.under_view.size() == e.under_base.size() &&
              std::equal(e.under_view.begin(), e.under_view.end(), e.under_base.begin(),
                         [](const Value& a, const Value& b) { return values_equal(a, b); });
    result.entries.push_back(std::move(e));
  }
  return result;
}

// ---- attackers ----------------------------------------------------------------

AttackOutcome attack_weighted_sampling(const QuerierView& view, std::uint64_t seed) {
  const RelationInstance& inst = view.instance();
  std::mt19937_64 rng(seed);
  AttackOutcome out;

  std::vector<std::vector<Value>> visible(inst.arity());
  for (std::uint32_t t = 0; t < inst.tuples(); ++t) {
    for (std::uint32_t a = 0; a < inst.arity(); ++a) {
      if (const Value* v = view.observe({t, a})) visible[a].push_back(*v);
    }
  }

  for (CellRef c : view.hidden_cells()) {
    const AttributeDef& attr = inst.schema().attribute(c.attribute);
    const auto& column = visible[c.attribute];
    Value guess;
    if (!column.empty()) {
      // Sampling a visible entry uniformly is sampling the empirical distribution.
      std::uniform_int_distribution<std::size_t> pick(0, column.size() - 1);
      guess = column[pick(rng)];
    } else if (attr.is_discrete()) {
      std::uniform_int_distribution<std::size_t> pick(0, attr.values.size() - 1);
      guess = attr.values[pick(rng)];
    } else {
      std::uniform_real_distribution<double> pick(attr.min, attr.max);
      guess = pick(rng);
    }
    ++out.total;
    if (values_equal(guess, inst.at(c))) ++out.correct;
    out.guesses.emplace(c, std::move(guess));
  }
  return out;
}

AttackOutcome attack_constraint_propagation(const QuerierView& view, const DependencySet& deps,
                                            std::uint64_t budget) {
  const RelationInstance& inst = view.instance();
  AttackOutcome out;
  QuerierView current = view;
  const std::size_t rounds = view.hidden_count();
  for (std::size_t round = 0; round < rounds; ++round) {
    bool progress = false;
    for (CellRef c : current.hidden_cells()) {
      const auto constraints = oracle_constraints(deps, c, inst);
      if (constraints.empty()) continue;
      const auto inferred = oracle_inferred_set(c, current, constraints, budget);
      if (inferred.size() != 1) continue;
      ++out.total;
      if (values_equal(inferred.front(), inst.at(c))) ++out.correct;
      out.guesses.emplace(c, inferred.front());
      const CellRef revealed[] = {c};
      current = current.with_revealed(revealed);
      progress = true;
    }
    if (!progress) break;
  }
  return out;
}

// ---- connectivity -------------------------------------------------------------

std::string_view to_string(Tier t) noexcept {
  switch (t) {
    case Tier::Low: return "low";
    case Tier::Medium: return "medium";
    case Tier::High: return "high";
  }
  return "?";
}

std::vector<ConnectivityRow> dependency_connectivity(const Schema& schema, const DependencySet& deps) {
  const std::size_t n = schema.size();
  std::vector<std::vector<std::size_t>> edges;
  for (const auto& dc : deps.dcs) edges.push_back(attributes_of(dc));
  for (const auto& fc : deps.fcs) edges.push_back(attributes_of(fc));

  std::vector<std::size_t> degree(n, 0);
  std::vector<std::set<std::size_t>> adj(n);
  for (const auto& e : edges) {
    for (std::size_t a : e) {
      ++degree[a];
      for (std::size_t b : e) {
        if (a != b) adj[a].insert(b);
      }
    }
  }

  std::vector<ConnectivityRow> rows;
  for (std::size_t a = 0; a < n; ++a) {
    std::set<std::size_t> seen{a};
    std::vector<std::size_t> stack{a};
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      for (std::size_t y : adj[x]) {
        if (seen.insert(y).second) stack.push_back(y);
      }
    }
    std::size_t score = degree[a];
    for (std::size_t b : seen) {
      if (b != a) score += degree[b];
    }
    rows.push_back({schema.attribute(a).name, degree[a], score, Tier::Low});
  }
  std::sort(rows.begin(), rows.end(), [](const ConnectivityRow& x, const ConnectivityRow& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.degree != y.degree) return x.degree > y.degree;
    return x.attribute < y.attribute;
  });
  const std::size_t third = (n + 2) / 3;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].tier = i < third ? Tier::High : (i < 2 * third ? Tier::Medium : Tier::Low);
  }
  return rows;
}

}  // namespace deniable
