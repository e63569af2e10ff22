#pragma once

#include <stdexcept>
#include <string>

namespace covsel {

/// Malformed input data or configuration (CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The model collection is empty or every candidate is degenerate (CLI exit code 3).
class DegenerateCollectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dense test-oracle construction would exceed its configured size guard.
class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace covsel
