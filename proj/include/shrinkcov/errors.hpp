#pragma once

#include <stdexcept>
#include <string>

namespace shrinkcov {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix dimensions do not agree.
class DimError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Too few observations for the requested computation.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// The shrinkage system is singular: the sample matrix is (numerically)
/// proportional to the target, so the optimal weights are not identified.
class DegenerateTarget : public Error {
 public:
  using Error::Error;
};

/// Invalid argument value.
class ArgError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (config file, experiment setup, CLI parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace shrinkcov
