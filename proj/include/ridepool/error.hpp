#pragma once

#include <stdexcept>
#include <string>

namespace ridepool {

// Invalid user-supplied configuration (bad field values, malformed config).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structural problems with in-memory data: empty networks, shape mismatches,
// malformed input files.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoRouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (e.g. an infeasible action).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Instance too large for an exhaustive routine.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Per-trip data missing for a trip that a solution references.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ridepool
