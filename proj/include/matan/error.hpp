#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace matan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Inputs that are well-formed but unusable (empty graph, bad split, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf detected in a loss, gradient or input matrix.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace matan
