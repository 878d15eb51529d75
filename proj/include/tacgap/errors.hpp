#pragma once

#include <stdexcept>
#include <string>

namespace tacgap {

// Base of every error raised by the library. The two intermediate families
// map onto the CLI exit codes: ParameterError -> 2, NumericalError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise unusable argument to a special function.
class DomainError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// Malformed interval union (overlapping, unsorted or empty pieces).
class DomainModelError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class AccuracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EvaluationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateDeterminantError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ResolventError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientDataError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tacgap
