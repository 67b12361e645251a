#pragma once

#include <stdexcept>
#include <string>

namespace rsma {

// Bad shapes, out-of-range configuration, malformed partitions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A kernel failed to converge or produced non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rsma
