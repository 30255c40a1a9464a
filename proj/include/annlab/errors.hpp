#pragma once

#include <stdexcept>
#include <string>

namespace annlab {

/// Base class of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Dense point passed where a bit vector is required, or vice versa.
class RepresentationMismatch : public Error {
 public:
  using Error::Error;
};

/// A construction would exceed an explicit size budget.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, ground truth).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An internal guarantee was violated; always a bug or corrupted input.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace annlab
