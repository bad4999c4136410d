#pragma once

#include <stdexcept>
#include <string>

namespace tmrisk {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value cannot be encoded under its feature spec (unknown category,
/// non-finite number, missing value).
class EncodingError : public Error {
 public:
  using Error::Error;
};

/// Malformed schema, config, or persisted model.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Dimension or state mismatch between objects that must agree.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters or operation preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File-system failures, carrying the OS message verbatim.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmrisk
