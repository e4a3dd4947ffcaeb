#pragma once

#include <stdexcept>
#include <string>

namespace ancod {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or pattern dimensions do not fit together (m > n, k > m, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A combinatorial construction is not available for the requested order.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A pattern submatrix is (numerically) rank deficient.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// Refusal to enumerate more patterns than the configured guard allows.
class GuardError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized frame.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ancod
