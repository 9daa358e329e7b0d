#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace convroof {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Points of mismatched dimension, empty clouds, non-finite coordinates.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidCombinationError : public Error {
 public:
  using Error::Error;
};

/// A null-space or factorization step fell below its numerical tolerance.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// The simplex iteration cap was exceeded.
class NonterminationError : public Error {
 public:
  using Error::Error;
};

/// Query point lies outside the convex hull of the sample cloud.
class MembershipError : public Error {
 public:
  using Error::Error;
};

class NotOnBoundaryError : public Error {
 public:
  using Error::Error;
};

/// No nonvertical supporting hyperplane exists at `point` within the gradient bound.
class VerticalHyperplaneError : public Error {
 public:
  VerticalHyperplaneError(const std::string& what, std::vector<double> point)
      : Error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

class UnknownExampleError : public Error {
 public:
  using Error::Error;
};

/// Quantum state or isometry that violates its normalization invariants.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class EigenSolverError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace convroof
