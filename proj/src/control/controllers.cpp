#include "corridor/control/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace corridor {

std::string_view to_string(ModelBasedController::Branch branch) {
  switch (branch) {
    case ModelBasedController::Branch::Hold:
      return "hold";
    case ModelBasedController::Branch::Cruise:
      return "cruise";
    case ModelBasedController::Branch::NoWait:
      return "no_wait";
  }
  return "?";
}

void ModelBasedController::reset(const ControllerContext& ctx) {
  u_ = ctx.network.speed_limits.regular;
  params_ = ShockwaveParams<double>{w_, u_, ctx.network.speed_limits.ems, ctx.spec.d, ctx.spec.x_a, ctx.network.z()};
  validate(params_);
  phase_ = Phase::Waiting;
  first_stop_line_ = ctx.network.stop_line(0);
  ems_was_behind_ = false;
  cruise_speed_.reset();
  last_cruise_.reset();

  if (ctx.network.intersection_count() > 1 && params_.x_a < 0.0) {
    // Evaluated once, from the configured w rather than live queue data.
    auto check = no_wait_condition(params_.z, -params_.x_a, params_.w, params_.U, params_.d, params_.V);
    branch_ = check.proceed ? Branch::NoWait : Branch::Hold;
    return;
  }
  if (params_.x_a <= optimal_split(params_)) {
    branch_ = Branch::Hold;
    return;
  }
  branch_ = Branch::Cruise;
  double bound = cruise_speed_bound(params_);
  cruise_speed_ = std::isfinite(bound) ? std::min(0.9 * bound, u_) : u_;
}

bool ModelBasedController::ems_has_passed(const Observation& obs) {
  if (obs.p_ev <= obs.p_cav) ems_was_behind_ = true;
  if (obs.p_ev <= obs.p_cav) return false;
  if (obs.l_ev == obs.l_cav || obs.p_ev > first_stop_line_) return true;
  // an EMS that started ahead in the other lane has not overtaken yet
  return ems_was_behind_ && obs.p_ev - obs.p_cav > release_lead_;
}

double ModelBasedController::act(const Observation& obs, const IdmHook& idm) {
  last_cruise_.reset();
  if (branch_ == Branch::NoWait || phase_ == Phase::Released || !obs.ems_in_range) {
    return idm(u_);
  }
  if (ems_has_passed(obs)) {
    phase_ = Phase::Released;
    return idm(u_);
  }
  if (branch_ == Branch::Hold) {
    return min_accel_;
  }
  last_cruise_ = *cruise_speed_;
  return idm(*cruise_speed_);
}

double PolicyController::act(const Observation& obs, const IdmHook&) {
  return policy_.act_deterministic(normalize(obs, scale_));
}

}  // namespace corridor
