#pragma once

#include <stdexcept>
#include <string>

namespace bidbench {

/// Root of the library's error taxonomy. Everything thrown on purpose derives
/// from this, so callers can catch one type at the boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a precondition (bad dimension, empty range, unknown name).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A numeric input left its mathematical domain (e.g. a bid outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A cell could not be parsed as a number; message names row and column.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input data was structurally unusable (missing cell, zero-variance column).
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// Data was valid but cannot support the requested fit (single-class
/// outcomes, zero residual variance, non-positive-definite system).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

/// The operation is undefined for this model -- the "n.a." cells of the
/// summary tables (naive pricing has no response function).
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

/// Optimization failed; message carries the step index where it happened.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace bidbench
