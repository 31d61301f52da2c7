#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "deniable/value.hpp"

namespace deniable {

enum class AttributeKind { Discrete, Continuous };

struct AttributeDef {
  std::string name;
  AttributeKind kind = AttributeKind::Discrete;
  std::vector<Value> values;  // discrete: ordered, distinct
  double min = 0.0;           // continuous: closed interval [min, max]
  double max = 0.0;
  std::size_t bins = 16;      // continuous: grid resolution for enumeration

  bool is_discrete() const noexcept { return kind == AttributeKind::Discrete; }

  // True when every value is a number, so order comparisons are meaningful.
  bool is_numeric() const noexcept;

  bool contains(const Value& v) const noexcept;

  // Index of v in a discrete domain.
  std::optional<std::size_t> index_of(const Value& v) const noexcept;

  // Throws Error(InvalidSchema) on an empty/duplicated discrete domain or a
  // degenerate continuous interval.
  void validate() const;
};

// Cardinality for discrete domains, interval length for continuous ones.
double domain_size(const AttributeDef& attr) noexcept;

// How function-based constraints are evaluated when validating data.
enum class FcArithmetic { Product, Sum };

class Schema {
 public:
  Schema() = default;
  Schema(std::string relation, std::vector<AttributeDef> attributes,
         std::optional<std::string> owner_column = std::nullopt,
         FcArithmetic fc_arithmetic = FcArithmetic::Product);

  const std::string& relation() const noexcept { return relation_; }
  const std::vector<AttributeDef>& attributes() const noexcept { return attributes_; }
  std::size_t size() const noexcept { return attributes_.size(); }
  const AttributeDef& attribute(std::size_t i) const { return attributes_.at(i); }
  const std::optional<std::string>& owner_column() const noexcept { return owner_column_; }
  FcArithmetic fc_arithmetic() const noexcept { return fc_arithmetic_; }

  std::optional<std::size_t> find(std::string_view name) const noexcept;

  // Like find, but throws Error(UnknownAttribute).
  std::size_t require(std::string_view name) const;

 private:
  std::string relation_;
  std::vector<AttributeDef> attributes_;
  std::optional<std::string> owner_column_;
  FcArithmetic fc_arithmetic_ = FcArithmetic::Product;
};

struct CellRef {
  std::uint32_t tuple = 0;
  std::uint32_t attribute = 0;

  friend auto operator<=>(const CellRef&, const CellRef&) = default;
};

std::string to_string(const CellRef& c);

class RelationInstance {
 public:
  // Validates every value against its attribute domain; throws
  // Error(DomainViolation) naming the offending row and column.
  RelationInstance(Schema schema, std::vector<std::vector<Value>> rows,
                   std::vector<std::string> owners = {});

  const Schema& schema() const noexcept { return schema_; }
  std::size_t tuples() const noexcept { return tuples_; }
  std::size_t arity() const noexcept { return schema_.size(); }
  std::size_t cell_count() const noexcept { return cells_.size(); }
  bool has_owners() const noexcept { return !owners_.empty(); }

  const Value& at(CellRef c) const { return cells_[index(c)]; }
  const Value& at(std::size_t tuple, std::size_t attribute) const {
    return cells_[tuple * arity() + attribute];
  }
  const std::string& owner(std::size_t tuple) const { return owners_.at(tuple); }

  bool contains(CellRef c) const noexcept {
    return c.tuple < tuples_ && c.attribute < arity();
  }
  std::size_t index(CellRef c) const noexcept {
    return static_cast<std::size_t>(c.tuple) * arity() + c.attribute;
  }

  // Rows [first, last) as a new instance with the same schema.
  RelationInstance slice(std::size_t first, std::size_t last) const;

 private:
  Schema schema_;
  std::size_t tuples_ = 0;
  std::vector<Value> cells_;  // row-major
  std::vector<std::string> owners_;
};

// Per-querier assignment of each cell to its true value or NULL. Views are
// immutable; hiding more cells produces a new view.
class QuerierView {
 public:
  explicit QuerierView(std::shared_ptr<const RelationInstance> instance);

  const RelationInstance& instance() const noexcept { return *instance_; }
  const std::shared_ptr<const RelationInstance>& instance_ptr() const noexcept {
    return instance_;
  }

  bool is_hidden(CellRef c) const { return mask_[instance_->index(c)] != 0; }

  // nullptr stands for NULL.
  const Value* observe(CellRef c) const {
    return is_hidden(c) ? nullptr : &instance_->at(c);
  }

  std::size_t hidden_count() const noexcept { return hidden_count_; }
  std::vector<CellRef> hidden_cells() const;

  QuerierView with_hidden(std::span<const CellRef> cells) const;
  QuerierView with_hidden(const std::set<CellRef>& cells) const;
  QuerierView with_revealed(std::span<const CellRef> cells) const;

  friend bool operator==(const QuerierView& a, const QuerierView& b) {
    return a.instance_ == b.instance_ && a.mask_ == b.mask_;
  }

 private:
  std::shared_ptr<const RelationInstance> instance_;
  std::vector<std::uint8_t> mask_;
  std::size_t hidden_count_ = 0;
};

// Every cell NULL.
QuerierView base_view(std::shared_ptr<const RelationInstance> instance);

// A view hiding exactly `hidden`.
QuerierView make_view(std::shared_ptr<const RelationInstance> instance,
                      const std::set<CellRef>& hidden);

enum class PolicyAction { Deny, Allow };

struct SelectionCondition {
  std::string attribute;
  CompareOp op = CompareOp::Eq;
  Value value;
};

// Either a relational object condition (selection + projection) or, for
// surgical fixtures, an explicit list of (tuple, attribute) cells.
struct Policy {
  std::string querier;
  std::string relation;
  std::vector<SelectionCondition> selection;
  std::vector<std::string> projection;
  PolicyAction action = PolicyAction::Deny;
  std::optional<std::vector<std::pair<std::size_t, std::string>>> cells;
};

struct SensitiveSet {
  std::string querier;
  std::set<CellRef> cells;
};

SensitiveSet sensitivity_determination(std::span<const Policy> policies,
                                       const std::string& querier,
                                       const RelationInstance& instance);

}  // namespace deniable

template <>
struct std::hash<deniable::CellRef> {
  std::size_t operator()(const deniable::CellRef& c) const noexcept {
    return (static_cast<std::size_t>(c.tuple) << 20) ^ c.attribute;
  }
};
