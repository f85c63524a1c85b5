#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace advreg {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when an inflated-domain point has no preimage on the base lattice
// under the given perturbation sample (e.g. the point came from a finer sample).
struct EmptyNeighborhood : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A local fit window stayed empty even after the widening fallback.
struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& what, std::uint64_t seed_in = 0)
      : std::runtime_error(what), seed(seed_in) {}
  std::uint64_t seed = 0;
};

struct NonPositiveRisk : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace advreg
