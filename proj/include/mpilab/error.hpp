#pragma once

#include <stdexcept>
#include <string>

namespace mpilab {

enum class ErrorCode {
  InvalidArgument,     // precondition on an input value
  ContractViolation,   // a predictor or external volume broke its output contract
  Unsupported,         // configuration outside what an operation implements
  DomainError,         // query outside the region a formula is valid for
  DegenerateGeometry,  // singular or ill-conditioned homography
  Numeric,             // non-finite or otherwise unusable numeric result
  EmptyRegion,         // a metric mask selected no pixels
  MissingMetadata,
  InconsistentMetadata,
  PlaneCountMismatch,
  UnsupportedVersion,
  CorruptFile,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Process exit code for the CLI: 2 validation, 3 numeric/geometry, 4 I/O.
int exit_code_for(ErrorCode code);

/// Re-throws `e` with `context` prepended to the message, keeping the code.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace mpilab
