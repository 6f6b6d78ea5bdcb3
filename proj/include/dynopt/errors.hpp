#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed but violates a domain invariant (negative weight, duplicate edge, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Instance is degenerate for the requested operation (isolated node, disconnected graph, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for this kind of input.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure left its stable regime (step size too large, overflow, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Raised when the FFT window is too short to resolve the requested number of peaks.
class InsufficientResolution : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dynopt
