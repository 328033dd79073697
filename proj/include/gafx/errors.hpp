#pragma once

#include <stdexcept>
#include <string>

namespace gafx {

// Base for every error the library raises. The CLI maps subclasses onto its
// exit-code contract (see run_cli in src/app.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input problems: bad files, bad schema, bad flags. Exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

class UsageError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyInputError : public InputError {
 public:
  using InputError::InputError;
};

class StratificationError : public InputError {
 public:
  using InputError::InputError;
};

// Value outside the domain of a codec function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or parameters. Exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gafx
