#pragma once

#include <stdexcept>
#include <string>

namespace roughop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (negative time, H outside (0,1), s > t).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix sizes that do not agree with the grid.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A covariance factorization failed even after the full jitter ladder.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// Requested computation is not supported for the given input (e.g. quadrature in > 4 dimensions).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an API contract (e.g. random coefficients without a gradient rule).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration text, unknown key, unresolvable catalog name.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure while persisting or loading artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace roughop
