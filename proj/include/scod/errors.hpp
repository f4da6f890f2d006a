#pragma once

#include <stdexcept>
#include <string>

namespace scod {

// Malformed configuration (world spec, eval config, CLI arguments).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input data (missing partitions, NaN score columns, degenerate scores).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (non-finite loss during fitting).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scod
