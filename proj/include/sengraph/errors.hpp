#pragma once

#include <stdexcept>

namespace sengraph {

/// A required input artifact (file or directory) is absent. Mapped to exit
/// code 2 by the command-line driver.
struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or gradient. Mapped to exit code 3 by
/// the command-line driver.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sengraph
