#include "deniable/detect.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "deniable/error.hpp"

namespace deniable {

Truth eval_predicate(const GroundPredicate& pred, const QuerierView& view) {
  const Value* l = pred.lhs.is_cell ? view.observe(pred.lhs.cell) : &pred.lhs.literal;
  const Value* r = pred.rhs.is_cell ? view.observe(pred.rhs.cell) : &pred.rhs.literal;
  if (!l || !r) return Truth::Unknown;
  return compare(*l, pred.op, *r) ? Truth::True : Truth::False;
}

bool ttc(const InstantiatedDependency& inst, const QuerierView& view, CellRef cell) {
  bool any = false;
  for (const auto& p : inst.predicates) {
    if (p.mentions(cell)) continue;
    any = true;
    if (eval_predicate(p, view) != Truth::True) return false;
  }
  if (!any) {
    throw Error(Errc::EmptyComplement,
                "every predicate of " + inst.id() + " involves " + to_string(cell));
  }
  return true;
}

std::vector<InstantiatedDependency> instantiate(const DenialConstraint& dc, std::uint32_t index,
                                                CellRef target, const RelationInstance& instance) {
  std::vector<InstantiatedDependency> out;
  const auto keep = [&](InstantiatedDependency inst) {
    if (inst.mentions(target)) out.push_back(std::move(inst));
  };
  if (dc.arity == 1) {
    keep(ground_dc(dc, index, target.tuple, target.tuple));
    return out;
  }
  const bool symmetric = dc.slot_symmetric();
  const auto n = static_cast<std::uint32_t>(instance.tuples());
  for (std::uint32_t u = 0; u < n; ++u) {
    if (u == target.tuple) continue;
    if (symmetric) {
      keep(ground_dc(dc, index, std::min(target.tuple, u), std::max(target.tuple, u)));
    } else {
      keep(ground_dc(dc, index, target.tuple, u));
      keep(ground_dc(dc, index, u, target.tuple));
    }
  }
  return out;
}

std::vector<InstantiatedDependency> instantiate(const FunctionConstraint& fc, std::uint32_t index,
                                                CellRef target, const RelationInstance& instance) {
  const auto attrs = attributes_of(fc);
  if (!std::binary_search(attrs.begin(), attrs.end(), target.attribute)) return {};
  return {fc_instantiate(fc, index, target.tuple, instance)};
}

std::vector<InstantiatedDependency> instantiate(const DependencySet& deps, CellRef target,
                                                const RelationInstance& instance) {
  std::vector<InstantiatedDependency> out;
  for (std::uint32_t i = 0; i < deps.dcs.size(); ++i) {
    auto part = instantiate(deps.dcs[i], i, target, instance);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  for (std::uint32_t i = 0; i < deps.fcs.size(); ++i) {
    auto part = instantiate(deps.fcs[i], i, target, instance);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

void Detection::append(Detection&& other) {
  std::move(other.cuesets.begin(), other.cuesets.end(), std::back_inserter(cuesets));
  std::move(other.residuals.begin(), other.residuals.end(), std::back_inserter(residuals));
}

namespace {

bool all_visible(std::span<const CellRef> cells, const QuerierView* view) {
  return !view || std::none_of(cells.begin(), cells.end(),
                               [&](CellRef c) { return view->is_hidden(c); });
}

std::vector<CellRef> sorted_unique(std::vector<CellRef> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

CuesetRule fc_rule(const FcRole& role, CellRef target, const QuerierView* view) {
  CuesetRule rule;
  if (target == role.output) {
    if (!all_visible(role.inputs, view)) return rule;
    rule.kind = CuesetRule::Kind::Cueset;
    rule.members = sorted_unique(role.inputs);
    return rule;
  }
  if (!role.invertible) return rule;
  std::vector<CellRef> others{role.output};
  for (CellRef c : role.inputs) {
    if (c != target) others.push_back(c);
  }
  if (!all_visible(others, view)) return rule;
  rule.kind = CuesetRule::Kind::Cueset;
  rule.members = {role.output};
  return rule;
}

}  // namespace

CuesetRule cueset_for(const InstantiatedDependency& inst, CellRef target, const QuerierView* view) {
  if (inst.fc) return fc_rule(*inst.fc, target, view);

  CuesetRule rule;
  std::vector<CellRef> members;
  std::vector<CellRef> partners;
  bool has_others = false;
  for (const auto& p : inst.predicates) {
    if (p.mentions(target)) {
      for (const GroundOperand* o : {&p.lhs, &p.rhs}) {
        if (o->is_cell && o->cell != target) partners.push_back(o->cell);
      }
      continue;
    }
    has_others = true;
    if (view && eval_predicate(p, *view) != Truth::True) return rule;
    if (p.lhs.is_cell) members.push_back(p.lhs.cell);
    if (p.rhs.is_cell) members.push_back(p.rhs.cell);
  }
  if (has_others) {
    rule.kind = CuesetRule::Kind::Cueset;
    rule.members = sorted_unique(std::move(members));
    return rule;
  }
  partners = sorted_unique(std::move(partners));
  if (partners.empty()) {
    rule.kind = CuesetRule::Kind::Residual;
    rule.reason = "only constant comparisons constrain this cell";
    return rule;
  }
  rule.kind = CuesetRule::Kind::Cueset;
  rule.members = std::move(partners);
  return rule;
}

// ---- Detector -------------------------------------------------------------

namespace {

struct JoinPlan {
  std::vector<std::size_t> own_discrete;      // attributes on the target's tuple
  std::vector<std::size_t> partner_discrete;  // matching attributes on the partner
  std::optional<std::pair<std::size_t, std::size_t>> continuous;  // own, partner
};

// Equalities between the two slots that do not involve the target cell.
JoinPlan join_plan(const DenialConstraint& dc, const Schema& schema, std::size_t target_attr,
                   bool target_first) {
  JoinPlan plan;
  const Slot own = target_first ? Slot::T1 : Slot::T2;
  for (const auto& p : dc.predicates) {
    if (p.op != CompareOp::Eq || !p.lhs.is_attr() || !p.rhs.is_attr() || p.lhs.slot == p.rhs.slot) {
      continue;
    }
    const Operand& mine = p.lhs.slot == own ? p.lhs : p.rhs;
    const Operand& theirs = p.lhs.slot == own ? p.rhs : p.lhs;
    if (mine.attr_index == target_attr) continue;
    if (schema.attribute(mine.attr_index).is_discrete() &&
        schema.attribute(theirs.attr_index).is_discrete()) {
      plan.own_discrete.push_back(mine.attr_index);
      plan.partner_discrete.push_back(theirs.attr_index);
    } else if (!plan.continuous) {
      plan.continuous = std::make_pair(mine.attr_index, theirs.attr_index);
    }
  }
  return plan;
}

bool index_less(const std::pair<Value, std::uint32_t>& a, const std::pair<Value, std::uint32_t>& b) {
  if (value_less(a.first, b.first)) return true;
  if (value_less(b.first, a.first)) return false;
  return a.second < b.second;
}

}  // namespace

Detector::Detector(const DependencySet& deps, const RelationInstance& instance)
    : deps_(&deps), instance_(&instance) {
  for (const auto& dc : deps.dcs) symmetric_.push_back(dc.slot_symmetric() ? 1 : 0);
}

std::vector<std::uint32_t> Detector::candidates(std::size_t dc, CellRef target, bool target_first,
                                                const QuerierView* view) const {
  std::vector<std::uint32_t> out;
  const JoinPlan plan = view ? join_plan(deps_->dcs[dc], instance_->schema(), target.attribute,
                                         target_first)
                             : JoinPlan{};
  // A joined cell of the target's tuple that is hidden makes its equality
  // Unknown for every partner.
  for (std::size_t a : plan.own_discrete) {
    if (view->is_hidden({target.tuple, static_cast<std::uint32_t>(a)})) return out;
  }
  if (!plan.own_discrete.empty()) {
    auto [git, fresh] = groups_.try_emplace(plan.partner_discrete);
    if (fresh) {
      for (std::uint32_t u = 0; u < instance_->tuples(); ++u) {
        git->second[tuple_key(*instance_, u, plan.partner_discrete)].push_back(u);
      }
    }
    auto it = git->second.find(tuple_key(*instance_, target.tuple, plan.own_discrete));
    if (it != git->second.end()) {
      for (std::uint32_t u : it->second) {
        if (u != target.tuple) out.push_back(u);
      }
    }
    return out;
  }
  if (plan.continuous) {
    const auto [own_attr, partner_attr] = *plan.continuous;
    const Value* key = view->observe({target.tuple, static_cast<std::uint32_t>(own_attr)});
    if (!key) return out;
    auto [sit, fresh] = sorted_.try_emplace(partner_attr);
    Sorted& idx = sit->second;
    if (fresh) {
      for (std::uint32_t t = 0; t < instance_->tuples(); ++t) idx.emplace_back(instance_->at(t, partner_attr), t);
      std::sort(idx.begin(), idx.end(), index_less);
    }
    auto first = idx.begin();
    auto last = idx.end();
    if (const auto* d = std::get_if<double>(key)) {
      first = std::lower_bound(idx.begin(), idx.end(),
                               std::make_pair(Value(*d - kNumericTolerance), 0u), index_less);
      last = std::upper_bound(first, idx.end(), std::make_pair(Value(*d + kNumericTolerance), ~0u),
                              index_less);
    } else {
      first = std::lower_bound(idx.begin(), idx.end(), std::make_pair(*key, 0u), index_less);
      last = std::upper_bound(first, idx.end(), std::make_pair(*key, ~0u), index_less);
    }
    for (; first != last; ++first) {
      if (first->second != target.tuple) out.push_back(first->second);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  for (std::uint32_t u = 0; u < instance_->tuples(); ++u) {
    if (u != target.tuple) out.push_back(u);
  }
  return out;
}

namespace {

const Value* observe_operand(const Operand& o, std::uint32_t t1, std::uint32_t t2, const QuerierView& view) {
  if (!o.is_attr()) return &o.literal;
  return view.observe({o.slot == Slot::T1 ? t1 : t2, static_cast<std::uint32_t>(o.attr_index)});
}

bool operand_is(const Operand& o, std::uint32_t t1, std::uint32_t t2, CellRef cell) {
  return o.is_attr() && o.attr_index == cell.attribute && (o.slot == Slot::T1 ? t1 : t2) == cell.tuple;
}

// False when some predicate not involving the target is not True under the
// view, so grounding the pair could yield no cueset.
bool may_tattle(const DenialConstraint& dc, std::uint32_t t1, std::uint32_t t2, CellRef target,
                const QuerierView& view) {
  for (const auto& p : dc.predicates) {
    if (operand_is(p.lhs, t1, t2, target) || operand_is(p.rhs, t1, t2, target)) continue;
    const Value* l = observe_operand(p.lhs, t1, t2, view);
    const Value* r = observe_operand(p.rhs, t1, t2, view);
    if (!l || !r || !compare(*l, p.op, *r)) return false;
  }
  return true;
}

}  // namespace

void Detector::for_each_instantiation(
    CellRef target, const QuerierView* view,
    const std::function<void(const InstantiatedDependency&)>& fn) const {
  const auto emit = [&](InstantiatedDependency inst) {
    if (inst.mentions(target)) fn(inst);
  };
  const auto ground = [&](const DenialConstraint& dc, std::uint32_t i, std::uint32_t t1, std::uint32_t t2) {
    if (view && !may_tattle(dc, t1, t2, target, *view)) return;
    emit(ground_dc(dc, i, t1, t2));
  };
  for (std::uint32_t i = 0; i < deps_->dcs.size(); ++i) {
    const DenialConstraint& dc = deps_->dcs[i];
    const auto attrs = attributes_of(dc);
    if (!std::binary_search(attrs.begin(), attrs.end(), target.attribute)) continue;
    if (dc.arity == 1) {
      ground(dc, i, target.tuple, target.tuple);
      continue;
    }
    if (symmetric_[i]) {
      for (std::uint32_t u : candidates(i, target, true, view)) {
        ground(dc, i, std::min(target.tuple, u), std::max(target.tuple, u));
      }
      continue;
    }
    for (std::uint32_t u : candidates(i, target, true, view)) ground(dc, i, target.tuple, u);
    for (std::uint32_t u : candidates(i, target, false, view)) ground(dc, i, u, target.tuple);
  }
  for (std::uint32_t i = 0; i < deps_->fcs.size(); ++i) {
    for (auto& inst : instantiate(deps_->fcs[i], i, target, *instance_)) fn(inst);
  }
}

namespace {

void record(Detection& out, const InstantiatedDependency& inst, CellRef target, CuesetRule rule) {
  if (rule.kind == CuesetRule::Kind::Cueset) {
    out.cuesets.push_back({target, std::move(rule.members), inst.key});
  } else if (rule.kind == CuesetRule::Kind::Residual) {
    out.residuals.push_back({target, inst.id(), std::move(rule.reason)});
  }
}

}  // namespace

Detection Detector::detect(std::span<const CellRef> targets, const QuerierView& view) const {
  Detection out;
  for (CellRef c : targets) {
    for_each_instantiation(c, &view, [&](const InstantiatedDependency& inst) {
      record(out, inst, c, cueset_for(inst, c, &view));
    });
  }
  return out;
}

Detection Detector::detect_oblivious(std::span<const CellRef> targets) const {
  Detection out;
  for (CellRef c : targets) {
    for_each_instantiation(c, nullptr, [&](const InstantiatedDependency& inst) {
      record(out, inst, c, cueset_for(inst, c, nullptr));
    });
  }
  return out;
}

std::vector<std::pair<InstantiatedDependency, CuesetRule>> Detector::leaking(
    CellRef target, const QuerierView& view) const {
  std::vector<std::pair<InstantiatedDependency, CuesetRule>> out;
  for_each_instantiation(target, &view, [&](const InstantiatedDependency& inst) {
    auto rule = cueset_for(inst, target, &view);
    if (rule.kind == CuesetRule::Kind::Cueset) out.emplace_back(inst, std::move(rule));
  });
  return out;
}

Detection detect(std::span<const CellRef> targets, const DependencySet& deps, const QuerierView& view) {
  return Detector(deps, view.instance()).detect(targets, view);
}

Detection detect_oblivious(std::span<const CellRef> targets, const DependencySet& deps,
                           const RelationInstance& instance) {
  return Detector(deps, instance).detect_oblivious(targets);
}

// ---- query-based ----------------------------------------------------------

Detection detect_query_based(std::span<const CellRef> targets, const DependencySet& deps,
                             const RelationInstance& instance, const QuerierView& view) {
  Detection out;
  if (targets.empty()) return out;

  // Target tuples with their target attributes, the "temp" relation.
  std::map<std::uint32_t, std::vector<CellRef>> by_tuple;
  for (CellRef c : targets) by_tuple[c.tuple].push_back(c);

  struct Hit {
    CellRef target;
    InstantiationKey key;
    CuesetRule rule;
    std::string id;
  };
  std::vector<Hit> hits;

  const auto scan = [&](const InstantiatedDependency& inst, const std::vector<CellRef>& owned) {
    std::vector<Truth> truth;
    truth.reserve(inst.predicates.size());
    for (const auto& p : inst.predicates) truth.push_back(eval_predicate(p, view));
    // WHERE: each predicate holds, or one of its cells is a target of this tuple.
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == Truth::True) continue;
      const bool owner_null = std::any_of(owned.begin(), owned.end(),
                                          [&](CellRef c) { return inst.predicates[i].mentions(c); });
      if (!owner_null) return;
    }
    for (CellRef c : owned) {
      if (!inst.mentions(c)) continue;
      CuesetRule rule;
      std::vector<CellRef> members;
      std::vector<CellRef> partners;
      bool has_others = false;
      bool ok = true;
      for (std::size_t i = 0; i < truth.size() && ok; ++i) {
        const auto& p = inst.predicates[i];
        if (p.mentions(c)) {
          for (const GroundOperand* o : {&p.lhs, &p.rhs}) {
            if (o->is_cell && o->cell != c) partners.push_back(o->cell);
          }
          continue;
        }
        has_others = true;
        ok = truth[i] == Truth::True;
        if (p.lhs.is_cell) members.push_back(p.lhs.cell);
        if (p.rhs.is_cell) members.push_back(p.rhs.cell);
      }
      if (!ok) continue;
      auto& chosen = has_others ? members : partners;
      std::sort(chosen.begin(), chosen.end());
      chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
      if (chosen.empty()) {
        rule.kind = CuesetRule::Kind::Residual;
        rule.reason = "only constant comparisons constrain this cell";
      } else {
        rule.kind = CuesetRule::Kind::Cueset;
        rule.members = std::move(chosen);
      }
      hits.push_back({c, inst.key, std::move(rule), inst.id()});
    }
  };

  const auto n = static_cast<std::uint32_t>(instance.tuples());
  for (std::uint32_t i = 0; i < deps.dcs.size(); ++i) {
    const DenialConstraint& dc = deps.dcs[i];
    const bool symmetric = dc.slot_symmetric();
    for (const auto& [t, owned] : by_tuple) {
      if (dc.arity == 1) {
        scan(ground_dc(dc, i, t, t), owned);
        continue;
      }
      for (std::uint32_t u = 0; u < n; ++u) {
        if (u == t) continue;
        if (symmetric) {
          scan(ground_dc(dc, i, std::min(t, u), std::max(t, u)), owned);
        } else {
          scan(ground_dc(dc, i, t, u), owned);
          scan(ground_dc(dc, i, u, t), owned);
        }
      }
    }
  }
  for (std::uint32_t i = 0; i < deps.fcs.size(); ++i) {
    for (const auto& [t, owned] : by_tuple) {
      const auto inst = fc_instantiate(deps.fcs[i], i, t, instance);
      for (CellRef c : owned) {
        if (!inst.mentions(c)) continue;
        auto rule = cueset_for(inst, c, &view);
        if (rule.kind != CuesetRule::Kind::None) hits.push_back({c, inst.key, std::move(rule), inst.id()});
      }
    }
  }

  for (auto& h : hits) {
    if (h.rule.kind == CuesetRule::Kind::Cueset) {
      out.cuesets.push_back({h.target, std::move(h.rule.members), h.key});
    } else {
      out.residuals.push_back({h.target, h.id, std::move(h.rule.reason)});
    }
  }
  return out;
}

// ---- ownership filter -----------------------------------------------------

Detection filter_owner(Detection detection, const std::string& querier,
                       const RelationInstance& instance) {
  if (!instance.has_owners()) {
    throw Error(Errc::MissingOwnership, "ownership filtering needs an owner column");
  }
  Detection out;
  out.residuals = std::move(detection.residuals);
  for (auto& cs : detection.cuesets) {
    std::erase_if(cs.members, [&](CellRef c) { return instance.owner(c.tuple) == querier; });
    if (cs.members.empty()) {
      out.residuals.push_back({cs.owner, "tuple " + std::to_string(cs.origin.t1) + "/" +
                                             std::to_string(cs.origin.t2),
                               "every cue cell belongs to the querier"});
      continue;
    }
    out.cuesets.push_back(std::move(cs));
  }
  return out;
}

}  // namespace deniable
