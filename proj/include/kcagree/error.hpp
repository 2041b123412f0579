#pragma once

#include <stdexcept>
#include <string>

namespace kcagree {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs was violated (bad length, malformed code, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or search exceeded its configured size or wall-time budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

class MalformedPairCode : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PadTooSmall : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LengthMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmbeddingTooLong : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RuntimeBoundExceeded : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public BudgetError {
 public:
  using BudgetError::BudgetError;
};

class DomainTooLarge : public BudgetError {
 public:
  using BudgetError::BudgetError;
};

}  // namespace kcagree
