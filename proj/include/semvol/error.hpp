#pragma once

#include <stdexcept>
#include <string>

namespace semvol {

/// Malformed or inconsistent input data (files, names, shapes).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, divergence, or degenerate numerical state.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semvol
