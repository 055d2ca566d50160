#pragma once

#include <stdexcept>
#include <string>

namespace fibrelab {

enum class ErrorKind {
  InvalidArgument,
  TubeDegenerate,
  GridTooCoarse,
  NoConvergence,
  FactorizationFailed,
  DegenerateField,
  EmptySet,
  NonTransversalZero,
  DegenerateEffectiveEigenvalue,
  PairingAmbiguous,
  InsufficientPoints,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the study driver, the CLI) can map it to a policy or exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fibrelab
