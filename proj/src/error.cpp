#include "mpilab/error.hpp"

namespace mpilab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::ContractViolation: return "contract violation";
    case ErrorCode::Unsupported: return "unsupported configuration";
    case ErrorCode::DomainError: return "out of domain";
    case ErrorCode::DegenerateGeometry: return "degenerate geometry";
    case ErrorCode::Numeric: return "numeric error";
    case ErrorCode::EmptyRegion: return "empty region";
    case ErrorCode::MissingMetadata: return "missing metadata";
    case ErrorCode::InconsistentMetadata: return "inconsistent metadata";
    case ErrorCode::PlaneCountMismatch: return "plane count mismatch";
    case ErrorCode::UnsupportedVersion: return "unsupported version";
    case ErrorCode::CorruptFile: return "corrupt file";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::Numeric:
      return 3;
    case ErrorCode::Io:
    case ErrorCode::CorruptFile:
      return 4;
    default:
      return 2;
  }
}

void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.code(), context + ": " + e.what());
}

}  // namespace mpilab
