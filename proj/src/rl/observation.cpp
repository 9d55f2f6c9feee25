#include "corridor/rl/observation.hpp"

#include <cmath>

#include "corridor/error.hpp"

namespace corridor {

Eigen::Matrix<double, Observation::kDim, 1> Observation::raw() const {
  Eigen::Matrix<double, kDim, 1> x;
  x << v_lead, h_lead, v_follower, h_follower, v_ev, static_cast<double>(l_ev), p_ev, v_cav, p_cav;
  return x;
}

Observation observe(const Simulation& sim, const ObservationConfig& config) {
  const Vehicle* cav = sim.cav_id() ? sim.find(*sim.cav_id()) : nullptr;
  if (cav == nullptr) {
    throw DomainError("observe: no CAV in the network");
  }
  Observation obs;
  obs.v_cav = cav->speed;
  obs.p_cav = cav->position;
  obs.l_cav = cav->lane;

  obs.h_lead = config.sentinel_headway;
  if (const Vehicle* lead = sim.leader_of(*cav)) {
    obs.v_lead = lead->speed;
    obs.h_lead = lead->rear() - cav->position;
  }
  obs.h_follower = config.sentinel_headway;
  if (const Vehicle* fol = sim.follower_of(*cav)) {
    obs.v_follower = fol->speed;
    obs.h_follower = cav->rear() - fol->position;
  }

  obs.l_ev = cav->lane;
  obs.p_ev = cav->position;
  const Vehicle* ems = sim.ems_id() ? sim.find(*sim.ems_id()) : nullptr;
  if (ems != nullptr && std::abs(cav->position - ems->position) < config.comm_range) {
    obs.ems_in_range = true;
    obs.v_ev = ems->speed;
    obs.l_ev = ems->lane;
    obs.p_ev = ems->position;
  }
  return obs;
}

Eigen::VectorXd normalize(const Observation& obs, const ObservationScale& scale) {
  Eigen::VectorXd x(Observation::kDim);
  x << obs.v_lead / scale.speed, obs.h_lead / scale.length, obs.v_follower / scale.speed,
      obs.h_follower / scale.length, obs.v_ev / scale.speed, static_cast<double>(obs.l_ev),
      obs.p_ev / scale.length, obs.v_cav / scale.speed, obs.p_cav / scale.length;
  if (!x.allFinite()) {
    throw DomainError("normalize: non-finite observation");
  }
  return x;
}

}  // namespace corridor
