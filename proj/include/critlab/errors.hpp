#pragma once

#include <stdexcept>
#include <string>

namespace critlab {

// Violated precondition on user-supplied data (bad radii, exponent, sizes).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure (root find, shooting bracket) could not deliver.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver stopped without meeting its tolerances.
class NonConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DomainError(what);
}

}  // namespace critlab
