#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ranklab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (bad dimension, unknown name, unreadable file).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold for the given data,
/// e.g. a non-convex field handed to the rank pipeline.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Eigenvalue derivative requested at a point where the eigenvalue is not simple.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Operator evaluated outside its validity region (singular A, zero trace, x = 0).
class ValidityError : public Error {
 public:
  explicit ValidityError(const std::string& what, std::optional<std::size_t> node = std::nullopt)
      : Error(what), node_(node) {}

  std::optional<std::size_t> node() const { return node_; }

 private:
  std::optional<std::size_t> node_;
};

/// Newton iteration failed to reduce the residual or ran out of iterations.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace ranklab
