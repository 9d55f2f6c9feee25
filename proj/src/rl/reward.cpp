#include "corridor/rl/reward.hpp"

#include "corridor/error.hpp"

namespace corridor {

RewardCase reward_case(const Observation& obs, bool prose_variant) {
  if (!obs.ems_in_range) return RewardCase::CavOnly;
  double rel = obs.p_cav - obs.p_ev;
  bool same_lane = obs.l_ev == obs.l_cav;
  if (prose_variant && rel > 0.0) return RewardCase::EmsBehind;
  if (same_lane) return RewardCase::CavOnly;
  if (rel <= 0.0) return RewardCase::EmsAheadOtherLane;
  return RewardCase::EmsBehind;
}

double reward(const Observation& obs, const RewardCoefficients& c, bool prose_variant) {
  if (c.nu1 < 0.0 || c.nu2 < 0.0 || c.nu3 < 0.0 || c.nu4 < 0.0) {
    throw DomainError("reward: coefficients must be non-negative");
  }
  switch (reward_case(obs, prose_variant)) {
    case RewardCase::EmsAheadOtherLane: return c.nu1 * obs.v_ev + c.nu2 * obs.v_cav;
    case RewardCase::EmsBehind: return c.nu3 * obs.v_ev + c.nu4 * obs.v_cav;
    case RewardCase::CavOnly: return obs.v_cav;
  }
  return obs.v_cav;
}

}  // namespace corridor
