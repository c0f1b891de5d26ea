#pragma once

#include <stdexcept>
#include <string>

namespace farpt {

/// Argument outside the mathematical domain of an operation (u < 0, tau < 0, log argument <= 1, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Count or index outside its admissible range (K > N, n > N, budget above the curve maximum).
class RangeError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// An iterative scalar solve could not bracket or reach its tolerance.
class NonConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Psi * Psi^T is numerically singular, so the affine projection is undefined.
class FactorizationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A success column never brackets the 0.5 level.
class NoCrossingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Vectors or matrices with incompatible dimensions.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace farpt
