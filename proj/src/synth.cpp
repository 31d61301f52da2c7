#include "deniable/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "deniable/error.hpp"

namespace deniable {

namespace {

using Row = std::vector<Value>;

const Value& operand_value(const Operand& o, const Row& r1, const Row& r2) {
  if (!o.is_attr()) return o.literal;
  return (o.slot == Slot::T1 ? r1 : r2)[o.attr_index];
}

bool violated(const DenialConstraint& dc, const Row& r1, const Row& r2) {
  return std::all_of(dc.predicates.begin(), dc.predicates.end(), [&](const Predicate& p) {
    return compare(operand_value(p.lhs, r1, r2), p.op, operand_value(p.rhs, r1, r2));
  });
}

std::string row_key(const Row& row, const std::vector<std::size_t>& attrs) {
  std::string key;
  for (std::size_t a : attrs) {
    key += to_literal(row[a]);
    key += '\x1f';
  }
  return key;
}

// Per binary constraint: the discrete attributes joined by cross-slot
// equalities, and the finished rows grouped by each side's key.
struct JoinGroups {
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  std::unordered_map<std::string, std::vector<std::size_t>> by_left;
  std::unordered_map<std::string, std::vector<std::size_t>> by_right;
};

JoinGroups make_groups(const DenialConstraint& dc, const Schema& schema) {
  JoinGroups g;
  for (const auto& p : dc.predicates) {
    if (p.op != CompareOp::Eq || !p.lhs.is_attr() || !p.rhs.is_attr() || p.lhs.slot == p.rhs.slot) continue;
    const Operand& a = p.lhs.slot == Slot::T1 ? p.lhs : p.rhs;
    const Operand& b = p.lhs.slot == Slot::T1 ? p.rhs : p.lhs;
    if (!schema.attribute(a.attr_index).is_discrete() || !schema.attribute(b.attr_index).is_discrete()) continue;
    g.left.push_back(a.attr_index);
    g.right.push_back(b.attr_index);
  }
  return g;
}

double round_to_grid(double x, const AttributeDef& attr) {
  const double step = (attr.max - attr.min) / 1000.0;
  return std::clamp(attr.min + std::round((x - attr.min) / step) * step, attr.min, attr.max);
}

}  // namespace

RelationInstance generate(const Schema& schema, const DependencySet& deps, const GenerateOptions& options) {
  const std::size_t n_attr = schema.size();
  std::mt19937_64 rng(options.seed);

  // Constraints are checked once the last of their attributes is assigned.
  std::vector<std::vector<std::size_t>> dcs_at(n_attr);
  for (std::size_t i = 0; i < deps.dcs.size(); ++i) {
    const auto attrs = attributes_of(deps.dcs[i]);
    dcs_at[attrs.back()].push_back(i);
  }
  std::vector<const FunctionConstraint*> fc_for(n_attr, nullptr);
  for (const auto& fc : deps.fcs) {
    for (std::size_t in : fc.input_indices) {
      if (in >= fc.output_index) {
        throw Error(Errc::InvalidArgument, "generator needs the inputs of " + fc.id + " before its output");
      }
      if (!schema.attribute(in).is_numeric()) {
        throw Error(Errc::InvalidArgument, "function constraint " + fc.id + " has a non-numeric input");
      }
    }
    if (fc_for[fc.output_index]) {
      throw Error(Errc::InvalidArgument, "attribute '" + fc.output + "' is the output of two functions");
    }
    fc_for[fc.output_index] = &fc;
  }
  std::vector<JoinGroups> groups;
  for (const auto& dc : deps.dcs) groups.push_back(make_groups(dc, schema));

  const auto consistent = [&](const Row& row, std::size_t attr, const std::vector<Row>& done) {
    for (std::size_t i : dcs_at[attr]) {
      const DenialConstraint& dc = deps.dcs[i];
      if (dc.arity == 1) {
        if (violated(dc, row, row)) return false;
        continue;
      }
      const JoinGroups& g = groups[i];
      if (g.left.empty()) {
        for (const Row& other : done) {
          if (violated(dc, row, other) || violated(dc, other, row)) return false;
        }
        continue;
      }
      if (auto it = g.by_right.find(row_key(row, g.left)); it != g.by_right.end()) {
        for (std::size_t u : it->second) {
          if (violated(dc, row, done[u])) return false;
        }
      }
      if (auto it = g.by_left.find(row_key(row, g.right)); it != g.by_left.end()) {
        for (std::size_t u : it->second) {
          if (violated(dc, done[u], row)) return false;
        }
      }
    }
    return true;
  };

  const auto fc_value = [&](const FunctionConstraint& fc, const Row& row) {
    const bool sum = schema.fc_arithmetic() == FcArithmetic::Sum;
    double acc = sum ? 0.0 : 1.0;
    for (std::size_t in : fc.input_indices) {
      const double x = std::get<double>(row[in]);
      acc = sum ? acc + x : acc * x;
    }
    return acc;
  };

  std::vector<Row> rows;
  rows.reserve(options.rows);
  for (std::size_t t = 0; t < options.rows; ++t) {
    bool complete = false;
    for (std::size_t attempt = 0; attempt < options.attempts_per_tuple && !complete; ++attempt) {
      Row row(n_attr);
      complete = true;
      for (std::size_t a = 0; a < n_attr && complete; ++a) {
        const AttributeDef& attr = schema.attribute(a);
        std::vector<Value> candidates;
        if (fc_for[a]) {
          const Value v = fc_value(*fc_for[a], row);
          if (attr.contains(v)) candidates.push_back(v);
        } else if (attr.is_discrete()) {
          candidates = attr.values;
          std::shuffle(candidates.begin(), candidates.end(), rng);
        } else {
          std::uniform_real_distribution<double> draw(attr.min, attr.max);
          for (int i = 0; i < 8; ++i) candidates.emplace_back(round_to_grid(draw(rng), attr));
        }
        complete = false;
        for (Value& v : candidates) {
          row[a] = std::move(v);
          if (consistent(row, a, rows)) {
            complete = true;
            break;
          }
        }
      }
      if (!complete) continue;
      for (std::size_t i = 0; i < groups.size(); ++i) {
        JoinGroups& g = groups[i];
        if (g.left.empty()) continue;
        g.by_left[row_key(row, g.left)].push_back(rows.size());
        g.by_right[row_key(row, g.right)].push_back(rows.size());
      }
      rows.push_back(std::move(row));
    }
    if (!complete) {
      throw Error(Errc::GenerationTimeout, "could not complete tuple " + std::to_string(t) + " after " +
                                               std::to_string(options.attempts_per_tuple) + " attempts");
    }
  }

  std::vector<std::string> owners;
  if (schema.owner_column()) {
    for (std::size_t t = 0; t < rows.size(); ++t) {
      owners.push_back("user" + std::to_string(t % std::max<std::size_t>(options.owners, 1)));
    }
  }
  return RelationInstance(schema, std::move(rows), std::move(owners));
}

Schema tax_like_schema() {
  const auto labels = [](const char* prefix, int count) {
    std::vector<Value> v;
    for (int i = 0; i < count; ++i) {
      std::string s = prefix;
      if (i < 10) s += '0';
      s += std::to_string(i);
      v.emplace_back(std::move(s));
    }
    return v;
  };
  const auto numbers = [](int first, int count, int step) {
    std::vector<Value> v;
    for (int i = 0; i < count; ++i) v.emplace_back(static_cast<double>(first + i * step));
    return v;
  };
  std::vector<AttributeDef> attrs;
  attrs.push_back({"State", AttributeKind::Discrete, labels("S", 20), 0, 0, 16});
  attrs.push_back({"AreaCode", AttributeKind::Discrete, numbers(201, 60, 1), 0, 0, 16});
  attrs.push_back({"Zip", AttributeKind::Discrete, numbers(10001, 300, 1), 0, 0, 16});
  attrs.push_back({"City", AttributeKind::Discrete, labels("C", 80), 0, 0, 16});
  attrs.push_back({"Marital", AttributeKind::Discrete, {Value("S"), Value("M")}, 0, 0, 16});
  attrs.push_back({"HasChild", AttributeKind::Discrete, {Value("Y"), Value("N")}, 0, 0, 16});
  attrs.push_back({"SingleExemp", AttributeKind::Discrete, numbers(0, 5, 500), 0, 0, 16});
  attrs.push_back({"ChildExemp", AttributeKind::Discrete, numbers(0, 4, 1000), 0, 0, 16});
  attrs.push_back({"Salary", AttributeKind::Continuous, {}, 10000, 200000, 16});
  attrs.push_back({"Rate", AttributeKind::Continuous, {}, 0, 0.5, 16});
  attrs.push_back({"Tax", AttributeKind::Continuous, {}, 0, 100000, 16});
  return Schema("tax", std::move(attrs));
}

std::string tax_like_constraints() {
  return "# tax-records style dependencies\n"
         "dc:zip_city: !(t1.Zip == t2.Zip & t1.City != t2.City)\n"
         "dc:zip_state: !(t1.Zip == t2.Zip & t1.State != t2.State)\n"
         "dc:area_state: !(t1.AreaCode == t2.AreaCode & t1.State != t2.State)\n"
         "dc:child_exemp: !(t1.State == t2.State & t1.HasChild == t2.HasChild & t1.ChildExemp != t2.ChildExemp)\n"
         "dc:single_exemp: !(t1.State == t2.State & t1.Marital == t2.Marital & t1.SingleExemp != t2.SingleExemp)\n"
         "fc:tax: t1.Tax = fn(t1.Salary, t1.Rate) invertible\n";
}

}  // namespace deniable
