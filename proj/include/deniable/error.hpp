#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace deniable {

enum class Errc {
  SchemaMismatch,
  DomainViolation,
  InvalidSchema,
  UnknownAttribute,
  ParseError,
  TrivialPredicate,
  DuplicateId,
  InvalidPolicy,
  InvalidInstance,
  EmptyComplement,
  MissingOwnership,
  IterationCapExceeded,
  DomainTooLarge,
  GenerationTimeout,
  InvalidArgument,
  Io,
};

std::string_view to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Constraint-file syntax error. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(Errc::ParseError, "line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace deniable
