#pragma once

#include <stdexcept>
#include <string>

namespace nlnoise {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Requested sample rate cannot represent the signal.
class SamplingError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// An iterative solver failed or a simulation left its valid regime.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or configuration tree.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlnoise
