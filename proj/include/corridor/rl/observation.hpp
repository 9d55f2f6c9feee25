#pragma once

#include <Eigen/Dense>

#include "corridor/sim/simulation.hpp"

namespace corridor {

struct ObservationConfig {
  double comm_range = 300.0;
  double sentinel_headway = 350.0;
};

/// The CAV's view: immediate same-lane neighbours plus the EMS when it is
/// within V2V range. Absent neighbours read speed 0 and the sentinel headway;
/// an out-of-range EMS reads speed 0, the CAV's lane and the CAV's position.
struct Observation {
  double v_lead = 0.0;
  double h_lead = 0.0;
  double v_follower = 0.0;
  double h_follower = 0.0;
  double v_ev = 0.0;
  int l_ev = 0;
  double p_ev = 0.0;
  double v_cav = 0.0;
  double p_cav = 0.0;

  int l_cav = 0;
  bool ems_in_range = false;

  static constexpr int kDim = 9;

  Eigen::Matrix<double, kDim, 1> raw() const;
};

/// Requires a CAV in the network (DomainError otherwise).
Observation observe(const Simulation& sim, const ObservationConfig& config = {});

/// Positions and headways over the corridor length, speeds over the EMS
/// desired speed.
struct ObservationScale {
  double length = 367.0;
  double speed = 35.0;

  static ObservationScale of(const CorridorNetwork& network) {
    return {network.end(), network.speed_limits.ems};
  }
};

Eigen::VectorXd normalize(const Observation& obs, const ObservationScale& scale);

}  // namespace corridor
