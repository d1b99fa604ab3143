#pragma once

#include <stdexcept>
#include <string>

namespace tactics {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied argument (M < 1, empty range, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Observation index or action name outside the alphabet.
class EncodingError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (missing header, wrong field count, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Precondition between two library values broken (e.g. mismatched lengths).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A value failed an invariant check (non-stochastic row, bad model file).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Problem too large for an exhaustive routine.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Every hidden path has probability zero.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// File could not be opened or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tactics
