#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace npl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or precondition violated by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable numerical result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A mixture component received (numerically) zero responsibility mass.
class DegenerateComponentError : public NumericalError {
 public:
  DegenerateComponentError(std::size_t component, const std::string& what)
      : NumericalError(what), component_(component) {}

  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
};

}  // namespace npl
