#pragma once

#include <stdexcept>
#include <string>

namespace corridor {

// Input outside the mathematical domain of an operation (non-finite values,
// parameter orderings that break a formula's assumptions).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A scenario whose placements cannot be realized on the network.
class InfeasibleScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A post-step invariant failed. Always a bug surface; the episode is aborted.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace corridor
