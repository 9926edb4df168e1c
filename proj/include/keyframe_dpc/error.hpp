#pragma once

#include <stdexcept>
#include <string>

namespace kfdpc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data (a file, a matrix, a parameter blob) is malformed or has
/// inconsistent dimensions.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The input is well-formed but too small for the requested computation,
/// e.g. a cutoff distance over a single point.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace kfdpc
