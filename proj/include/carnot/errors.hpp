#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dimension or container-size mismatch between values and their space.
struct ShapeError : Error {
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// Group step outside the range supported by the truncated product.
struct UnsupportedStepError : Error {
  using Error::Error;
};

/// An iterative procedure exhausted its step budget.
struct ConvergenceError : Error {
  using Error::Error;
};

/// A structural hypothesis required by a construction does not hold.
struct HypothesisError : Error {
  using Error::Error;
};

/// Two values that must describe the same object disagree.
struct ConsistencyError : Error {
  using Error::Error;
};

/// Malformed or unreadable input document.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace carnot
