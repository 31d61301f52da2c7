#include "deniable/error.hpp"

namespace deniable {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::DomainViolation: return "DomainViolation";
    case Errc::InvalidSchema: return "InvalidSchema";
    case Errc::UnknownAttribute: return "UnknownAttribute";
    case Errc::ParseError: return "ParseError";
    case Errc::TrivialPredicate: return "TrivialPredicate";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::InvalidPolicy: return "InvalidPolicy";
    case Errc::InvalidInstance: return "InvalidInstance";
    case Errc::EmptyComplement: return "EmptyComplement";
    case Errc::MissingOwnership: return "MissingOwnership";
    case Errc::IterationCapExceeded: return "IterationCapExceeded";
    case Errc::DomainTooLarge: return "DomainTooLarge";
    case Errc::GenerationTimeout: return "GenerationTimeout";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace deniable
