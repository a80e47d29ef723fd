#pragma once

#include <stdexcept>

namespace qpdyn {

/// Malformed inputs: bad grid parameters, mismatched fields, unusable configs.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation broke down numerically: NaN state, step-size underflow,
/// residue checks above threshold.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable, corrupt or mismatched files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qpdyn
