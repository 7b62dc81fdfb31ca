#pragma once

#include <stdexcept>

namespace noma {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
struct ContractViolation : Error {
  using Error::Error;
};

/// An argument is outside the mathematical domain of the operation.
struct DomainError : Error {
  using Error::Error;
};

/// Invalid configuration or instance data.
struct ConfigError : Error {
  using Error::Error;
};

/// The request exceeds what this implementation can compute (size caps).
struct CapabilityError : Error {
  using Error::Error;
};

/// Two inputs that must describe the same instance disagree.
struct ConsistencyError : Error {
  using Error::Error;
};

/// A file could not be parsed; the message names the offending field.
struct ParseError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace noma
