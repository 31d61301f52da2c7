#include "deniable/value.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace deniable {

std::string_view symbol(CompareOp op) noexcept {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

CompareOp flipped(CompareOp op) noexcept {
  switch (op) {
    case CompareOp::Lt: return CompareOp::Gt;
    case CompareOp::Le: return CompareOp::Ge;
    case CompareOp::Gt: return CompareOp::Lt;
    case CompareOp::Ge: return CompareOp::Le;
    default: return op;
  }
}

CompareOp negated(CompareOp op) noexcept {
  switch (op) {
    case CompareOp::Eq: return CompareOp::Ne;
    case CompareOp::Ne: return CompareOp::Eq;
    case CompareOp::Lt: return CompareOp::Ge;
    case CompareOp::Le: return CompareOp::Gt;
    case CompareOp::Gt: return CompareOp::Le;
    case CompareOp::Ge: return CompareOp::Lt;
  }
  return op;
}

bool values_equal(const Value& a, const Value& b) noexcept {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a)) {
    return std::fabs(*x - std::get<double>(b)) <= kNumericTolerance;
  }
  return std::get<std::string>(a) == std::get<std::string>(b);
}

bool compare(const Value& a, CompareOp op, const Value& b) noexcept {
  if (op == CompareOp::Eq) return values_equal(a, b);
  if (op == CompareOp::Ne) return !values_equal(a, b);
  if (a.index() != b.index()) return false;

  int cmp = 0;
  if (const auto* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    cmp = std::fabs(*x - y) <= kNumericTolerance ? 0 : (*x < y ? -1 : 1);
  } else {
    cmp = std::get<std::string>(a).compare(std::get<std::string>(b));
  }
  switch (op) {
    case CompareOp::Lt: return cmp < 0;
    case CompareOp::Le: return cmp <= 0;
    case CompareOp::Gt: return cmp > 0;
    case CompareOp::Ge: return cmp >= 0;
    default: return false;
  }
}

std::string to_text(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(),
                                       std::get<double>(v));
  return ec == std::errc{} ? std::string(buf.data(), end) : std::string("nan");
}

std::string to_literal(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    std::string out = "\"";
    for (char ch : *s) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    out += '"';
    return out;
  }
  return to_text(v);
}

bool value_less(const Value& a, const Value& b) noexcept {
  if (a.index() != b.index()) return a.index() < b.index();
  if (const auto* x = std::get_if<double>(&a)) return *x < std::get<double>(b);
  return std::get<std::string>(a) < std::get<std::string>(b);
}

}  // namespace deniable
