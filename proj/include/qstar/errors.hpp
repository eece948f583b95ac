#pragma once

#include <stdexcept>
#include <string>

namespace qstar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (edge lists, map files, configs).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a formula (e.g. c <= 1 for the critical
/// temperatures, beta == 0 for the Bethe free energy).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Overflow, non-finite intermediates, or degenerate denominators.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A state that violates the preconditions of an estimator, such as a
/// non-positive two-point partition function.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

}  // namespace qstar
