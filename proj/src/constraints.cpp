#include "deniable/constraints.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <set>
#include <tuple>
#include <unordered_map>

#include "deniable/error.hpp"

namespace deniable {

bool operator==(const Operand& a, const Operand& b) {
  if (a.kind != b.kind) return false;
  if (a.is_attr()) return a.slot == b.slot && a.attribute == b.attribute;
  return a.literal.index() == b.literal.index() && values_equal(a.literal, b.literal);
}

namespace {

// Orders operands so predicates can be compared regardless of which side an
// operand was written on.
auto operand_key(const Operand& o) {
  return std::make_tuple(o.is_attr() ? 0 : 1, static_cast<int>(o.slot), o.attribute,
                         o.is_attr() ? std::string() : to_literal(o.literal));
}

std::tuple<decltype(operand_key(Operand{})), int, decltype(operand_key(Operand{}))> canonical(
    const Predicate& p) {
  auto l = operand_key(p.lhs);
  auto r = operand_key(p.rhs);
  if (r < l) return {r, static_cast<int>(flipped(p.op)), l};
  return {l, static_cast<int>(p.op), r};
}

Operand swap_slot(Operand o) {
  if (o.is_attr()) o.slot = o.slot == Slot::T1 ? Slot::T2 : Slot::T1;
  return o;
}

}  // namespace

bool DenialConstraint::slot_symmetric() const {
  if (arity < 2) return true;
  std::multiset<decltype(canonical(Predicate{}))> original, swapped;
  for (const Predicate& p : predicates) {
    original.insert(canonical(p));
    swapped.insert(canonical({swap_slot(p.lhs), p.op, swap_slot(p.rhs)}));
  }
  return original == swapped;
}

// ---- parser ---------------------------------------------------------------

namespace {

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, pos_ + 1, msg); }
  [[noreturn]] void fail_at(std::size_t pos, const std::string& msg) const {
    throw ParseError(line_, pos + 1, msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  std::size_t pos() const noexcept { return pos_; }
  std::size_t line() const noexcept { return line_; }

  bool accept(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  bool peek_slot() {
    skip_ws();
    auto rest = text_.substr(pos_);
    return rest.size() >= 3 && rest[0] == 't' && (rest[1] == '1' || rest[1] == '2') && rest[2] == '.';
  }

  Operand operand() {
    skip_ws();
    if (peek_slot()) {
      const Slot slot = text_[pos_ + 1] == '1' ? Slot::T1 : Slot::T2;
      pos_ += 3;
      return Operand::attr(slot, identifier());
    }
    if (pos_ < text_.size() && text_[pos_] == '"') return Operand::constant(string_literal());
    return Operand::constant(number_literal());
  }

  std::string string_literal() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out += text_[pos_++];
    }
    if (pos_ >= text_.size()) fail("unterminated string literal");
    ++pos_;
    return out;
  }

  double number_literal() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[end])) ||
                                  std::strchr("+-.eE", text_[end]) != nullptr)) {
      ++end;
    }
    std::string_view tok = text_.substr(start, end - start);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size()) {
      fail("expected operand (t1.attr, t2.attr, number or quoted string)");
    }
    pos_ = end;
    return v;
  }

  CompareOp op() {
    skip_ws();
    static constexpr std::pair<std::string_view, CompareOp> kOps[] = {
        {"==", CompareOp::Eq}, {"!=", CompareOp::Ne}, {"<=", CompareOp::Le},
        {">=", CompareOp::Ge}, {"<", CompareOp::Lt},  {">", CompareOp::Gt}};
    for (const auto& [tok, o] : kOps) {
      if (accept(tok)) return o;
    }
    fail("expected comparison operator");
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

DenialConstraint parse_dc_body(LineParser& p, std::vector<std::size_t>& columns) {
  DenialConstraint dc;
  p.expect("!(");
  bool used[2] = {false, false};
  do {
    p.skip_ws();
    const std::size_t start = p.pos();
    Predicate pred;
    pred.lhs = p.operand();
    pred.op = p.op();
    pred.rhs = p.operand();
    if (!pred.lhs.is_attr() && !pred.rhs.is_attr()) {
      p.fail_at(start, "predicate compares two constants");
    }
    if (pred.lhs.is_attr() && pred.rhs.is_attr() && pred.lhs == pred.rhs) {
      throw Error(Errc::TrivialPredicate,
                  "line " + std::to_string(p.line()) + ", column " + std::to_string(start + 1) +
                      ": predicate compares t" + std::to_string(static_cast<int>(pred.lhs.slot) + 1) +
                      "." + pred.lhs.attribute + " with itself");
    }
    for (const Operand* o : {&pred.lhs, &pred.rhs}) {
      if (o->is_attr()) used[static_cast<int>(o->slot)] = true;
    }
    columns.push_back(start);
    dc.predicates.push_back(std::move(pred));
  } while (p.accept("&"));
  p.expect(")");
  if (!p.at_end()) p.fail("unexpected trailing input");
  if (used[1] && !used[0]) p.fail("a unary constraint must use t1");
  dc.arity = used[1] ? 2 : 1;
  return dc;
}

FunctionConstraint parse_fc_body(LineParser& p) {
  FunctionConstraint fc;
  p.expect("t1.");
  fc.output = p.identifier();
  p.expect("=");
  p.expect("fn(");
  do {
    p.expect("t1.");
    fc.inputs.push_back(p.identifier());
  } while (p.accept(","));
  p.expect(")");
  p.skip_ws();
  if (p.accept("noninvertible")) {
    fc.invertible = false;
  } else if (p.accept("invertible")) {
    fc.invertible = true;
  } else {
    p.fail("expected 'invertible' or 'noninvertible'");
  }
  if (!p.at_end()) p.fail("unexpected trailing input");
  std::set<std::string> seen{fc.output};
  for (const auto& in : fc.inputs) {
    if (!seen.insert(in).second) p.fail("attribute '" + in + "' repeated in function constraint");
  }
  return fc;
}

void resolve(DenialConstraint& dc, const Schema& schema, std::size_t line,
             const std::vector<std::size_t>& columns) {
  for (std::size_t i = 0; i < dc.predicates.size(); ++i) {
    Predicate& pred = dc.predicates[i];
    const AttributeDef* attrs[2] = {nullptr, nullptr};
    Operand* ops[2] = {&pred.lhs, &pred.rhs};
    for (int k = 0; k < 2; ++k) {
      if (!ops[k]->is_attr()) continue;
      ops[k]->attr_index = schema.require(ops[k]->attribute);
      attrs[k] = &schema.attribute(ops[k]->attr_index);
    }
    if (is_order_op(pred.op)) {
      for (int k = 0; k < 2; ++k) {
        const bool numeric = attrs[k] ? attrs[k]->is_numeric() : is_numeric(ops[k]->literal);
        if (!numeric) {
          throw ParseError(line, columns[i] + 1,
                           "operator " + std::string(symbol(pred.op)) +
                               " needs numeric operands");
        }
      }
    }
  }
}

void resolve(FunctionConstraint& fc, const Schema& schema) {
  fc.output_index = schema.require(fc.output);
  fc.input_indices.clear();
  for (const auto& in : fc.inputs) fc.input_indices.push_back(schema.require(in));
}

DependencySet parse_impl(std::string_view text, const Schema* schema) {
  DependencySet deps;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);

    LineParser p(line, line_no);
    if (p.at_end()) {
      if (end == text.size()) break;
      continue;
    }
    p.skip_ws();
    const std::size_t kind_col = p.pos();
    const std::string kind = p.identifier();
    if (kind != "dc" && kind != "fc") p.fail_at(kind_col, "expected 'dc' or 'fc'");
    p.expect(":");
    std::string id;
    // An explicit id is followed by a second ':'.
    {
      LineParser probe = p;
      probe.skip_ws();
      const bool maybe_id = !probe.peek_slot() && !probe.accept("!(");
      if (maybe_id) {
        id = p.identifier();
        p.expect(":");
      }
    }
    if (id.empty()) {
      id = kind + std::to_string(kind == "dc" ? deps.dcs.size() + 1 : deps.fcs.size() + 1);
    }
    if (!ids.insert(id).second) {
      throw Error(Errc::DuplicateId, "line " + std::to_string(line_no) + ": duplicate id '" + id + "'");
    }
    if (kind == "dc") {
      std::vector<std::size_t> columns;
      DenialConstraint dc = parse_dc_body(p, columns);
      dc.id = id;
      if (schema) resolve(dc, *schema, line_no, columns);
      deps.dcs.push_back(std::move(dc));
    } else {
      FunctionConstraint fc = parse_fc_body(p);
      fc.id = id;
      if (schema) resolve(fc, *schema);
      deps.fcs.push_back(std::move(fc));
    }
    if (end == text.size()) break;
  }
  return deps;
}

std::string format_operand(const Operand& o) {
  if (!o.is_attr()) return to_literal(o.literal);
  return (o.slot == Slot::T1 ? "t1." : "t2.") + o.attribute;
}

}  // namespace

DependencySet parse_constraints(std::string_view text) { return parse_impl(text, nullptr); }

DependencySet parse_constraints(std::string_view text, const Schema& schema) {
  return parse_impl(text, &schema);
}

std::string format_constraint(const DenialConstraint& dc) {
  std::string out = "dc:" + dc.id + ": !(";
  for (std::size_t i = 0; i < dc.predicates.size(); ++i) {
    if (i) out += " & ";
    const Predicate& p = dc.predicates[i];
    out += format_operand(p.lhs) + " " + std::string(symbol(p.op)) + " " + format_operand(p.rhs);
  }
  return out + ")";
}

std::string format_constraint(const FunctionConstraint& fc) {
  std::string out = "fc:" + fc.id + ": t1." + fc.output + " = fn(";
  for (std::size_t i = 0; i < fc.inputs.size(); ++i) {
    if (i) out += ", ";
    out += "t1." + fc.inputs[i];
  }
  return out + ") " + (fc.invertible ? "invertible" : "noninvertible");
}

std::string format_constraints(const DependencySet& deps) {
  std::string out;
  for (const auto& dc : deps.dcs) out += format_constraint(dc) + "\n";
  for (const auto& fc : deps.fcs) out += format_constraint(fc) + "\n";
  return out;
}

std::vector<std::size_t> attributes_of(const DenialConstraint& dc) {
  std::set<std::size_t> s;
  for (const auto& p : dc.predicates) {
    if (p.lhs.is_attr()) s.insert(p.lhs.attr_index);
    if (p.rhs.is_attr()) s.insert(p.rhs.attr_index);
  }
  return {s.begin(), s.end()};
}

std::vector<std::size_t> attributes_of(const FunctionConstraint& fc) {
  std::set<std::size_t> s(fc.input_indices.begin(), fc.input_indices.end());
  s.insert(fc.output_index);
  return {s.begin(), s.end()};
}

// ---- validation -----------------------------------------------------------

namespace {

const Value& operand_value(const Operand& o, const RelationInstance& inst, std::size_t t1,
                           std::size_t t2) {
  if (!o.is_attr()) return o.literal;
  return inst.at(o.slot == Slot::T1 ? t1 : t2, o.attr_index);
}

bool violates(const DenialConstraint& dc, const RelationInstance& inst, std::size_t t1, std::size_t t2) {
  return std::all_of(dc.predicates.begin(), dc.predicates.end(), [&](const Predicate& p) {
    return compare(operand_value(p.lhs, inst, t1, t2), p.op, operand_value(p.rhs, inst, t1, t2));
  });
}

// Cross-tuple equalities between discrete attributes: t1 side, t2 side.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> join_attributes(
    const DenialConstraint& dc, const Schema& schema) {
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (const auto& p : dc.predicates) {
    if (p.op != CompareOp::Eq || !p.lhs.is_attr() || !p.rhs.is_attr() || p.lhs.slot == p.rhs.slot) {
      continue;
    }
    const Operand& a = p.lhs.slot == Slot::T1 ? p.lhs : p.rhs;
    const Operand& b = p.lhs.slot == Slot::T1 ? p.rhs : p.lhs;
    if (!schema.attribute(a.attr_index).is_discrete() || !schema.attribute(b.attr_index).is_discrete()) {
      continue;
    }
    out.first.push_back(a.attr_index);
    out.second.push_back(b.attr_index);
  }
  return out;
}

}  // namespace

std::string tuple_key(const RelationInstance& instance, std::size_t tuple,
                      const std::vector<std::size_t>& attrs) {
  std::string key;
  for (std::size_t a : attrs) {
    key += to_literal(instance.at(tuple, a));
    key += '\x1f';
  }
  return key;
}

double apply_fc(const FunctionConstraint& fc, const RelationInstance& instance, std::size_t tuple) {
  const bool sum = instance.schema().fc_arithmetic() == FcArithmetic::Sum;
  double acc = sum ? 0.0 : 1.0;
  for (std::size_t a : fc.input_indices) {
    const auto* x = std::get_if<double>(&instance.at(tuple, a));
    if (!x) {
      throw Error(Errc::InvalidInstance, "function constraint " + fc.id + " has non-numeric input '" +
                                             instance.schema().attribute(a).name + "'");
    }
    acc = sum ? acc + *x : acc * *x;
  }
  return acc;
}

std::vector<Violation> validate_instance(const RelationInstance& instance, const DependencySet& deps) {
  std::vector<Violation> out;
  const std::size_t n = instance.tuples();
  for (const auto& dc : deps.dcs) {
    if (dc.arity == 1) {
      for (std::size_t t = 0; t < n; ++t) {
        if (violates(dc, instance, t, t)) out.push_back({dc.id, {t}});
      }
      continue;
    }
    const bool symmetric = dc.slot_symmetric();
    const auto [left, right] = join_attributes(dc, instance.schema());
    if (left.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = symmetric ? i + 1 : 0; j < n; ++j) {
          if (i != j && violates(dc, instance, i, j)) out.push_back({dc.id, {i, j}});
        }
      }
      continue;
    }
    // Only tuples agreeing on the joined attributes can violate.
    std::unordered_map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t j = 0; j < n; ++j) groups[tuple_key(instance, j, right)].push_back(j);
    std::vector<Violation> found;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = groups.find(tuple_key(instance, i, left));
      if (it == groups.end()) continue;
      for (std::size_t j : it->second) {
        if (i == j || (symmetric && j < i)) continue;
        if (violates(dc, instance, i, j)) found.push_back({dc.id, {i, j}});
      }
    }
    std::move(found.begin(), found.end(), std::back_inserter(out));
  }
  for (const auto& fc : deps.fcs) {
    for (std::size_t t = 0; t < n; ++t) {
      const double expected = apply_fc(fc, instance, t);
      const auto* got = std::get_if<double>(&instance.at(t, fc.output_index));
      const double tol = 1e-9 * std::max(1.0, std::fabs(expected));
      if (!got || std::fabs(*got - expected) > tol) out.push_back({fc.id, {t}});
    }
  }
  return out;
}

// ---- grounding ------------------------------------------------------------

std::vector<CellRef> InstantiatedDependency::cells() const {
  std::set<CellRef> s;
  for (const auto& p : predicates) {
    if (p.lhs.is_cell) s.insert(p.lhs.cell);
    if (p.rhs.is_cell) s.insert(p.rhs.cell);
  }
  return {s.begin(), s.end()};
}

bool InstantiatedDependency::mentions(CellRef c) const noexcept {
  return std::any_of(predicates.begin(), predicates.end(),
                     [&](const GroundPredicate& p) { return p.mentions(c); });
}

std::string InstantiatedDependency::id() const {
  std::string out = origin + "[" + std::to_string(key.t1);
  if (key.kind == DepKind::Dc && key.t2 != key.t1) out += "," + std::to_string(key.t2);
  return out + "]";
}

InstantiatedDependency ground_dc(const DenialConstraint& dc, std::uint32_t index, std::uint32_t t1,
                                 std::uint32_t t2) {
  InstantiatedDependency inst;
  inst.key = {DepKind::Dc, index, t1, dc.arity == 1 ? t1 : t2};
  inst.origin = dc.id;
  const auto ground_op = [&](const Operand& o) {
    GroundOperand g;
    if (o.is_attr()) {
      g.cell = {o.slot == Slot::T1 ? t1 : t2, static_cast<std::uint32_t>(o.attr_index)};
    } else {
      g.is_cell = false;
      g.literal = o.literal;
    }
    return g;
  };
  for (const auto& p : dc.predicates) inst.predicates.push_back({ground_op(p.lhs), p.op, ground_op(p.rhs)});
  return inst;
}

InstantiatedDependency fc_instantiate(const FunctionConstraint& fc, std::uint32_t index,
                                      std::uint32_t tuple, const RelationInstance& instance) {
  InstantiatedDependency inst;
  inst.key = {DepKind::Fc, index, tuple, tuple};
  inst.origin = fc.id;
  FcRole role;
  role.invertible = fc.invertible;
  role.output = {tuple, static_cast<std::uint32_t>(fc.output_index)};
  for (std::size_t a : fc.input_indices) {
    const CellRef c{tuple, static_cast<std::uint32_t>(a)};
    role.inputs.push_back(c);
    inst.predicates.push_back({{true, c, {}}, CompareOp::Eq, {false, {}, instance.at(c)}});
  }
  inst.predicates.push_back(
      {{true, role.output, {}}, CompareOp::Ne, {false, {}, instance.at(role.output)}});
  inst.fc = std::move(role);
  return inst;
}

InstantiatedDependency ground(const DependencySet& deps, const InstantiationKey& key,
                              const RelationInstance& instance) {
  if (key.kind == DepKind::Fc) return fc_instantiate(deps.fcs.at(key.index), key.index, key.t1, instance);
  return ground_dc(deps.dcs.at(key.index), key.index, key.t1, key.t2);
}

}  // namespace deniable
