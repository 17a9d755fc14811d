#pragma once

#include <stdexcept>
#include <string>

namespace kinnet {

/// Invalid configuration or argument (caller error).
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to meet its contract (non-convergence,
/// rank deficiency, singular system, violated identity).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kinnet
