#pragma once

#include <stdexcept>
#include <string>

namespace dhforge {

// Malformed or missing input data, invalid configuration. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The model cannot be completed as requested (no supply node, unreachable
// demand). CLI exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dhforge
