#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ngt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression source. Carries the byte offset of the offending
/// token and a human readable list of what would have been accepted there.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected, const std::string& found)
      : Error("parse error at offset " + std::to_string(offset) + ": expected " + expected +
              ", found " + found),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

/// Evaluation failures: unbound variables and mathematical domain errors.
class EvalError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside a supported range (k of a k-trace, a table lookup, ...).
class RangeError : public Error {
 public:
  RangeError(const std::string& what, std::ptrdiff_t index = -1) : Error(what), index_(index) {}
  /// Offending sample index for field operations, -1 otherwise.
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A mathematical hypothesis required by an operation does not hold on the sampled data.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

}  // namespace ngt
