#pragma once

#include <stdexcept>
#include <string>

namespace sfp {

/// Precondition or domain violation (bad hyperparameter, mismatched label, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Unreadable input or malformed file contents.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural problem in tabular input (ragged rows, unknown column, no rows).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown, e.g. a distance row with no finite entry.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sfp
