#pragma once

#include <stdexcept>
#include <string>

namespace carsel {

// Bad input data: unreadable files, malformed records, contract violations
// on user-supplied matrices. CLI exit code 2.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: degenerate variance, rank deficiency, non-finite
// intermediates. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace carsel
