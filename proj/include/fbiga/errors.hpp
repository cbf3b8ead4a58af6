#pragma once

#include <stdexcept>
#include <string>

namespace fbiga {

/// Raised for bad arguments (degree out of range, inconsistent sizes, ...).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Evaluation point outside the parametric interval.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Degenerate or folded geometry.
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Problem data violating a requirement (g must stay positive on the free boundary).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Singular or failed linear solve.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested option that is not supported for the given configuration.
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fbiga
