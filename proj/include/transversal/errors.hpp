#pragma once

#include <stdexcept>
#include <string>

namespace transversal {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration (bad field, mismatched groups, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed its enumeration or memory budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its domain, e.g. a Voronoi cell at the
/// identity of a configuration that does not contain the identity.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant failed. Always a bug.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace transversal
