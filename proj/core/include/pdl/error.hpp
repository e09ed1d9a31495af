#pragma once

#include <stdexcept>
#include <string>

namespace pdl {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad shapes, bad arguments, bad files. The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Non-finite values, degenerate statistics. The CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateStatisticsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A pseudo-domain holds a single class, so a two-class loss is undefined on it.
class ClassCollapsedError : public Error {
 public:
  using Error::Error;
};

}  // namespace pdl
