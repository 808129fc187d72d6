#pragma once

#include <stdexcept>
#include <string>

namespace ptra {

/// Bad arguments to an operation (malformed tour, index out of range, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file or JSON document could not be decoded. The message names the field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decoded data violates a domain invariant (e.g. zero clusters).
class ValidationError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Exhaustive search refused because the instance exceeds its guard rails.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A loss, gradient or parameter became NaN/Inf.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(std::string what, std::string parameter)
      : std::runtime_error(std::move(what)), parameter_(std::move(parameter)) {}

  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

}  // namespace ptra
