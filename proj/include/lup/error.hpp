#pragma once

#include <stdexcept>
#include <string>

namespace lup {

/// Base of every error the toolkit throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor dimensions disagree with what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is out of its valid domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The requested operation is not supported by this object (e.g. no closed-form gradient).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// The query budget ran out where the caller needed a result.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// Network or protocol failure talking to a remote oracle.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A BTF1 frame could not be decoded.
class MalformedFrame : public TransportError {
 public:
  using TransportError::TransportError;
};

}  // namespace lup
