#include "deniable/model.hpp"

#include <algorithm>
#include <utility>

#include "deniable/error.hpp"

namespace deniable {

bool AttributeDef::is_numeric() const noexcept {
  if (kind == AttributeKind::Continuous) return true;
  return std::all_of(values.begin(), values.end(),
                     [](const Value& v) { return deniable::is_numeric(v); });
}

bool AttributeDef::contains(const Value& v) const noexcept {
  if (kind == AttributeKind::Continuous) {
    const auto* x = std::get_if<double>(&v);
    return x != nullptr && *x >= min - kNumericTolerance && *x <= max + kNumericTolerance;
  }
  return index_of(v).has_value();
}

std::optional<std::size_t> AttributeDef::index_of(const Value& v) const noexcept {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values_equal(values[i], v)) return i;
  }
  return std::nullopt;
}

void AttributeDef::validate() const {
  if (name.empty()) throw Error(Errc::InvalidSchema, "attribute with empty name");
  if (kind == AttributeKind::Continuous) {
    if (!(min < max)) {
      throw Error(Errc::InvalidSchema,
                  "continuous attribute '" + name + "' needs min < max");
    }
    if (bins == 0) {
      throw Error(Errc::InvalidSchema, "attribute '" + name + "' needs bins >= 1");
    }
    return;
  }
  if (values.empty()) {
    throw Error(Errc::InvalidSchema, "discrete attribute '" + name + "' has an empty domain");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (values_equal(values[i], values[j])) {
        throw Error(Errc::InvalidSchema, "discrete attribute '" + name +
                                             "' repeats value " + to_literal(values[i]));
      }
    }
  }
}

double domain_size(const AttributeDef& attr) noexcept {
  if (attr.kind == AttributeKind::Continuous) return attr.max - attr.min;
  return static_cast<double>(attr.values.size());
}

Schema::Schema(std::string relation, std::vector<AttributeDef> attributes,
               std::optional<std::string> owner_column, FcArithmetic fc_arithmetic)
    : relation_(std::move(relation)),
      attributes_(std::move(attributes)),
      owner_column_(std::move(owner_column)),
      fc_arithmetic_(fc_arithmetic) {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    attributes_[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (attributes_[i].name == attributes_[j].name) {
        throw Error(Errc::InvalidSchema, "duplicate attribute '" + attributes_[i].name + "'");
      }
    }
    if (owner_column_ && *owner_column_ == attributes_[i].name) {
      throw Error(Errc::InvalidSchema, "owner column '" + *owner_column_ +
                                           "' must not also be an attribute");
    }
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::require(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(Errc::UnknownAttribute,
              "unknown attribute '" + std::string(name) + "' in relation '" + relation_ + "'");
}

std::string to_string(const CellRef& c) {
  return "(" + std::to_string(c.tuple) + "," + std::to_string(c.attribute) + ")";
}

RelationInstance::RelationInstance(Schema schema, std::vector<std::vector<Value>> rows,
                                   std::vector<std::string> owners)
    : schema_(std::move(schema)), tuples_(rows.size()), owners_(std::move(owners)) {
  if (!owners_.empty() && owners_.size() != rows.size()) {
    throw Error(Errc::SchemaMismatch, "owner column length does not match row count");
  }
  cells_.reserve(rows.size() * schema_.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema_.size()) {
      throw Error(Errc::SchemaMismatch, "row " + std::to_string(r) + " has " +
                                            std::to_string(rows[r].size()) + " values, expected " +
                                            std::to_string(schema_.size()));
    }
    for (std::size_t a = 0; a < rows[r].size(); ++a) {
      if (!schema_.attribute(a).contains(rows[r][a])) {
        throw Error(Errc::DomainViolation, "row " + std::to_string(r) + ", column '" +
                                               schema_.attribute(a).name + "': value " +
                                               to_literal(rows[r][a]) + " outside domain");
      }
      cells_.push_back(std::move(rows[r][a]));
    }
  }
}

RelationInstance RelationInstance::slice(std::size_t first, std::size_t last) const {
  last = std::min(last, tuples_);
  std::vector<std::vector<Value>> rows;
  std::vector<std::string> owners;
  for (std::size_t t = first; t < last; ++t) {
    rows.emplace_back(cells_.begin() + static_cast<std::ptrdiff_t>(t * arity()),
                      cells_.begin() + static_cast<std::ptrdiff_t>((t + 1) * arity()));
    if (has_owners()) owners.push_back(owners_[t]);
  }
  return RelationInstance(schema_, std::move(rows), std::move(owners));
}

QuerierView::QuerierView(std::shared_ptr<const RelationInstance> instance)
    : instance_(std::move(instance)), mask_(instance_->cell_count(), 0) {}

std::vector<CellRef> QuerierView::hidden_cells() const {
  std::vector<CellRef> out;
  out.reserve(hidden_count_);
  const auto arity = static_cast<std::uint32_t>(instance_->arity());
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) {
      out.push_back({static_cast<std::uint32_t>(i / arity), static_cast<std::uint32_t>(i % arity)});
    }
  }
  return out;
}

QuerierView QuerierView::with_hidden(std::span<const CellRef> cells) const {
  QuerierView next = *this;
  for (const CellRef& c : cells) {
    auto& bit = next.mask_[instance_->index(c)];
    if (!bit) {
      bit = 1;
      ++next.hidden_count_;
    }
  }
  return next;
}

QuerierView QuerierView::with_hidden(const std::set<CellRef>& cells) const {
  const std::vector<CellRef> v(cells.begin(), cells.end());
  return with_hidden(v);
}

QuerierView QuerierView::with_revealed(std::span<const CellRef> cells) const {
  QuerierView next = *this;
  for (const CellRef& c : cells) {
    auto& bit = next.mask_[instance_->index(c)];
    if (bit) {
      bit = 0;
      --next.hidden_count_;
    }
  }
  return next;
}

QuerierView base_view(std::shared_ptr<const RelationInstance> instance) {
  QuerierView view(std::move(instance));
  std::vector<CellRef> all;
  const auto& inst = view.instance();
  all.reserve(inst.cell_count());
  for (std::uint32_t t = 0; t < inst.tuples(); ++t) {
    for (std::uint32_t a = 0; a < inst.arity(); ++a) all.push_back({t, a});
  }
  return view.with_hidden(all);
}

QuerierView make_view(std::shared_ptr<const RelationInstance> instance,
                      const std::set<CellRef>& hidden) {
  return QuerierView(std::move(instance)).with_hidden(hidden);
}

namespace {

bool selection_matches(const std::vector<std::pair<std::size_t, const SelectionCondition*>>& conds,
                       const RelationInstance& instance, std::size_t tuple) {
  return std::all_of(conds.begin(), conds.end(), [&](const auto& c) {
    return compare(instance.at(tuple, c.first), c.second->op, c.second->value);
  });
}

}  // namespace

SensitiveSet sensitivity_determination(std::span<const Policy> policies,
                                       const std::string& querier,
                                       const RelationInstance& instance) {
  SensitiveSet out{querier, {}};
  const Schema& schema = instance.schema();
  for (const Policy& p : policies) {
    if (p.querier != querier || p.action != PolicyAction::Deny) continue;

    if (p.cells) {
      for (const auto& [tuple, attr] : *p.cells) {
        const std::size_t a = schema.require(attr);
        if (tuple >= instance.tuples()) {
          throw Error(Errc::InvalidPolicy, "policy cell tuple index " + std::to_string(tuple) +
                                               " out of range");
        }
        out.cells.insert({static_cast<std::uint32_t>(tuple), static_cast<std::uint32_t>(a)});
      }
      continue;
    }
    if (!p.relation.empty() && p.relation != schema.relation()) continue;

    std::vector<std::pair<std::size_t, const SelectionCondition*>> conds;
    for (const auto& c : p.selection) conds.emplace_back(schema.require(c.attribute), &c);
    std::vector<std::size_t> columns;
    for (const auto& name : p.projection) columns.push_back(schema.require(name));

    for (std::size_t t = 0; t < instance.tuples(); ++t) {
      if (!selection_matches(conds, instance, t)) continue;
      for (std::size_t a : columns) {
        out.cells.insert({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(a)});
      }
    }
  }
  return out;
}

}  // namespace deniable
