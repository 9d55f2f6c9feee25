#pragma once

#include "corridor/rl/observation.hpp"

namespace corridor {

struct RewardCoefficients {
  double nu1 = 0.1;
  double nu2 = 0.9;
  double nu3 = 0.0;
  double nu4 = 1.0;

  static RewardCoefficients single_intersection() { return {0.1, 0.9, 0.0, 1.0}; }
  static RewardCoefficients two_intersection() { return {1.0, 0.6, 1.0, 1.0}; }
};

enum class RewardCase {
  EmsAheadOtherLane,  // p_cav - p_ev <= 0, different lanes
  EmsBehind,          // p_cav - p_ev > 0
  CavOnly,            // same lane, or no EMS
};

/// Which branch of the composite reward applies. Same lane / no EMS is
/// checked first. With `prose_variant` an EMS behind the CAV in the same
/// lane takes the EmsBehind branch instead.
RewardCase reward_case(const Observation& obs, bool prose_variant = false);

/// Throws DomainError when a coefficient is negative.
double reward(const Observation& obs, const RewardCoefficients& coeffs, bool prose_variant = false);

}  // namespace corridor
