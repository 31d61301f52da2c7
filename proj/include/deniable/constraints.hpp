#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deniable/model.hpp"

namespace deniable {

enum class Slot : std::uint8_t { T1 = 0, T2 = 1 };

struct Operand {
  enum class Kind : std::uint8_t { TupleAttr, Constant };

  Kind kind = Kind::TupleAttr;
  Slot slot = Slot::T1;
  std::string attribute;
  std::size_t attr_index = 0;  // resolved against a schema when one is given
  Value literal;

  bool is_attr() const noexcept { return kind == Kind::TupleAttr; }

  static Operand attr(Slot slot, std::string name, std::size_t index = 0) {
    return {Kind::TupleAttr, slot, std::move(name), index, Value{}};
  }
  static Operand constant(Value v) { return {Kind::Constant, Slot::T1, {}, 0, std::move(v)}; }
};

bool operator==(const Operand& a, const Operand& b);

struct Predicate {
  Operand lhs;
  CompareOp op = CompareOp::Eq;
  Operand rhs;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct DenialConstraint {
  std::string id;
  int arity = 2;
  std::vector<Predicate> predicates;

  // True when exchanging t1 and t2 yields the same set of predicates, so one
  // slot order per tuple pair is enough.
  bool slot_symmetric() const;

  friend bool operator==(const DenialConstraint&, const DenialConstraint&) = default;
};

struct FunctionConstraint {
  std::string id;
  std::string output;
  std::size_t output_index = 0;
  std::vector<std::string> inputs;
  std::vector<std::size_t> input_indices;
  bool invertible = true;

  friend bool operator==(const FunctionConstraint&, const FunctionConstraint&) = default;
};

struct DependencySet {
  std::vector<DenialConstraint> dcs;
  std::vector<FunctionConstraint> fcs;

  bool empty() const noexcept { return dcs.empty() && fcs.empty(); }
  std::size_t size() const noexcept { return dcs.size() + fcs.size(); }

  friend bool operator==(const DependencySet&, const DependencySet&) = default;
};

// Syntax only; attribute names are left unresolved.
DependencySet parse_constraints(std::string_view text);

// Also resolves attributes and checks them against the schema.
DependencySet parse_constraints(std::string_view text, const Schema& schema);

std::string format_constraint(const DenialConstraint& dc);
std::string format_constraint(const FunctionConstraint& fc);
std::string format_constraints(const DependencySet& deps);

// Attribute indices mentioned by a constraint, ascending and distinct.
std::vector<std::size_t> attributes_of(const DenialConstraint& dc);
std::vector<std::size_t> attributes_of(const FunctionConstraint& fc);

struct Violation {
  std::string constraint_id;
  std::vector<std::size_t> tuples;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// Exact key over the values of `attrs` in one tuple. Discrete values are
// stored as their domain representatives, so equal keys mean equal values.
std::string tuple_key(const RelationInstance& instance, std::size_t tuple,
                      const std::vector<std::size_t>& attrs);

double apply_fc(const FunctionConstraint& fc, const RelationInstance& instance, std::size_t tuple);

std::vector<Violation> validate_instance(const RelationInstance& instance, const DependencySet& deps);

// ---- grounded forms -------------------------------------------------------

struct GroundOperand {
  bool is_cell = true;
  CellRef cell;
  Value literal;

  friend bool operator==(const GroundOperand&, const GroundOperand&) = default;
};

struct GroundPredicate {
  GroundOperand lhs;
  CompareOp op = CompareOp::Eq;
  GroundOperand rhs;

  bool mentions(CellRef c) const noexcept {
    return (lhs.is_cell && lhs.cell == c) || (rhs.is_cell && rhs.cell == c);
  }

  friend bool operator==(const GroundPredicate&, const GroundPredicate&) = default;
};

enum class DepKind : std::uint8_t { Dc, Fc };

// Identifies an instantiation: the constraint (kind + index into its list)
// and the tuple bound to each slot. t2 equals t1 for unary constraints and FCs.
struct InstantiationKey {
  DepKind kind = DepKind::Dc;
  std::uint32_t index = 0;
  std::uint32_t t1 = 0;
  std::uint32_t t2 = 0;

  friend auto operator<=>(const InstantiationKey&, const InstantiationKey&) = default;
};

struct FcRole {
  bool invertible = true;
  CellRef output;
  std::vector<CellRef> inputs;
};

struct InstantiatedDependency {
  InstantiationKey key;
  std::string origin;
  std::vector<GroundPredicate> predicates;
  std::optional<FcRole> fc;

  // Distinct cells, ascending.
  std::vector<CellRef> cells() const;
  bool mentions(CellRef c) const noexcept;
  std::string id() const;
};

InstantiatedDependency ground_dc(const DenialConstraint& dc, std::uint32_t index, std::uint32_t t1,
                                 std::uint32_t t2);

// not(in_1 = v_1 and ... and in_n = v_n and out != v_out) over one tuple.
InstantiatedDependency fc_instantiate(const FunctionConstraint& fc, std::uint32_t index,
                                      std::uint32_t tuple, const RelationInstance& instance);

// Rebuilds the instantiation a key refers to.
InstantiatedDependency ground(const DependencySet& deps, const InstantiationKey& key,
                              const RelationInstance& instance);

}  // namespace deniable
