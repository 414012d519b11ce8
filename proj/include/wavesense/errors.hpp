#pragma once

#include <stdexcept>

namespace wavesense {

// Invalid scenario, grid, or parameter configuration.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed, truncated, or unwritable trace data.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Decoded or constructed data that violates the trace invariants.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a series expected to be periodic has fewer than two
// qualifying peaks.
struct no_periodicity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wavesense
