#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace deniable {

// A cell value. Discrete attributes may hold either numbers or strings;
// continuous attributes always hold numbers.
using Value = std::variant<double, std::string>;

// Absolute tolerance for numeric equality.
inline constexpr double kNumericTolerance = 1e-9;

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view symbol(CompareOp op) noexcept;

// Operator such that `a op b` holds iff `b flipped(op) a` holds.
CompareOp flipped(CompareOp op) noexcept;

// Operator such that `a op b` holds iff `a negated(op) b` does not.
CompareOp negated(CompareOp op) noexcept;

inline bool is_order_op(CompareOp op) noexcept {
  return op != CompareOp::Eq && op != CompareOp::Ne;
}

inline bool is_numeric(const Value& v) noexcept {
  return std::holds_alternative<double>(v);
}

bool values_equal(const Value& a, const Value& b) noexcept;

// Two-valued comparison of two known values. Order comparisons between a
// number and a string are false.
bool compare(const Value& a, CompareOp op, const Value& b) noexcept;

// Plain rendering used in CSV output: shortest round-trip form for numbers.
std::string to_text(const Value& v);

// Literal rendering used in the constraint language: strings are quoted.
std::string to_literal(const Value& v);

// Total order used for sorting value sets (numbers before strings).
bool value_less(const Value& a, const Value& b) noexcept;

}  // namespace deniable
