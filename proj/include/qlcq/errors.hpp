#pragma once

#include <stdexcept>
#include <string>

namespace qlcq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: parameter out of domain, mismatched grids, bad config.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A geometric precondition failed (degenerate metric, non-spacelike mean
/// curvature vector, non-convex metric handed to the Weyl solver, ...).
class GeometryError : public Error {
public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class SolverError : public Error {
public:
  using Error::Error;
};

}  // namespace qlcq
