#pragma once

#include <stdexcept>

namespace icevp {

// Invalid configuration or input data: malformed files, out-of-range
// parameters, mismatched meshes or vector dimensions.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical solve failure: singular matrix, residual not reducible to
// tolerance, or Picard iteration cap reached.
struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace icevp
