#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osclab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates its domain invariant (non-positive wavelength, zero slope, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but the operation cannot be applied to it
/// (trace shorter than the fit requires, flat signal, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Oscillation amplitude is below the noise floor, so the mixing angle cannot be identified.
class UnidentifiableSignal : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// step() was called while no scan or manual session is running.
class NoActiveSession : public Error {
 public:
  NoActiveSession() : Error("no active scan or manual session") {}
};

/// Malformed trace or config file. `line()` is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace osclab
