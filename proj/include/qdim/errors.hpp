#pragma once

#include <stdexcept>
#include <string>

namespace qdim {

/// Nonlinear fit did not converge or the data cannot support a fit.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Experiment configuration is invalid (unknown key, bad value, missing file).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A data file does not match the expected schema. Message names the
/// offending row or column.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qdim
