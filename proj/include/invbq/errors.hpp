#pragma once

#include <stdexcept>
#include <string>

namespace invbq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatches, non-finite inputs, out-of-range indices.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The Gram matrix could not be factorized even at the largest jitter.
class SingularGram : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration (e.g. a GP and an embedding table built
/// from different kernels, or an unknown test function).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A reference quadrature did not reach its tolerance.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

/// The integrand returned a non-finite value.
class IntegrandError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent result/config files.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace invbq
