#include "fibrelab/error.hpp"

namespace fibrelab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TubeDegenerate: return "TubeDegenerate";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::FactorizationFailed: return "FactorizationFailed";
    case ErrorKind::DegenerateField: return "DegenerateField";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::NonTransversalZero: return "NonTransversalZero";
    case ErrorKind::DegenerateEffectiveEigenvalue: return "DegenerateEffectiveEigenvalue";
    case ErrorKind::PairingAmbiguous: return "PairingAmbiguous";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace fibrelab
