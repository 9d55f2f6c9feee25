#pragma once

#include <cmath>
#include <limits>

#include "corridor/error.hpp"
#include "corridor/sim/network.hpp"

namespace corridor {

/// Inputs of the shockwave-theoretic corridor clearance model. Distances are
/// measured from stop line 1 against the travel direction; a negative x_a is
/// a CAV already past stop line 1.
template <typename Scalar = double>
struct ShockwaveParams {
  Scalar w = Scalar(10);   // queue-discharge shockwave speed [m/s]
  Scalar U = Scalar(15);   // desired speed of regular traffic [m/s]
  Scalar V = Scalar(35);   // desired EMS speed [m/s]
  Scalar d = Scalar(0);    // EMS distance to stop line 1 at t0 [m]
  Scalar x_a = Scalar(0);  // CAV distance to stop line 1 at t0 [m]
  Scalar z = Scalar(192);  // stop line 1 to stop line 2 [m]
};

template <typename Scalar = double>
struct AnalyticTimes {
  Scalar t_1{};   // wait of the vehicle just ahead of the split point
  Scalar t_2{};   // EMS wait for the discharge wave
  Scalar t_s{};   // EMS arrival at the split point
  Scalar t_a{};   // first instant the CAV can move
  Scalar t_ev{};  // EMS reaches the stop line
  Scalar t_pre{}; // vehicle ahead of the split reaches the stop line
  Scalar x_L{};   // optimal split point
};

template <typename Scalar>
void validate(const ShockwaveParams<Scalar>& p) {
  using std::isfinite;
  if (!isfinite(p.w) || !isfinite(p.U) || !isfinite(p.V) || !isfinite(p.d) || !isfinite(p.x_a) ||
      !isfinite(p.z)) {
    throw DomainError("shockwave: non-finite parameter");
  }
  if (!(p.w > Scalar(0) && p.w <= p.U && p.U <= p.V)) {
    throw DomainError("shockwave: requires 0 < w <= U <= V");
  }
  if (p.d < Scalar(0)) {
    throw DomainError("shockwave: d must be >= 0");
  }
}

/// Split point equalizing the EMS arrival with the arrival of the vehicle
/// ahead of the split.
template <typename Scalar>
Scalar optimal_split(const ShockwaveParams<Scalar>& p) {
  validate(p);
  Scalar numerator = Scalar(1) / p.w + Scalar(1) / p.U;
  Scalar denominator = Scalar(1) / p.w + Scalar(2) / p.U - Scalar(1) / p.V;
  return p.d * numerator / denominator;
}

/// Distance from the CAV to the stop line it is queued at.
template <typename Scalar>
Scalar cav_queue_distance(const ShockwaveParams<Scalar>& p) {
  return p.x_a >= Scalar(0) ? p.x_a : p.z + p.x_a;
}

template <typename Scalar>
AnalyticTimes<Scalar> analytic_times(const ShockwaveParams<Scalar>& p) {
  AnalyticTimes<Scalar> t;
  t.x_L = optimal_split(p);
  t.t_1 = t.x_L / p.w;
  t.t_2 = p.d / p.w;
  t.t_s = t.t_2 + (p.d - t.x_L) / p.U;
  t.t_ev = t.t_s + t.x_L / p.V;
  t.t_pre = t.t_1 + t.x_L / p.U;
  t.t_a = cav_queue_distance(p) / p.w;
  return t;
}

/// CAV travel time to stop line 1 under the single-intersection strategy:
/// hold for the EMS when x_a <= x_L, otherwise discharge normally.
template <typename Scalar>
Scalar cav_travel_time_single(const ShockwaveParams<Scalar>& p) {
  Scalar x_L = optimal_split(p);
  if (p.x_a <= x_L) {
    return p.d / p.w + (p.d - p.x_a) / p.w + p.x_a / p.U;
  }
  return p.x_a / p.w + p.x_a / p.U;
}

/// Highest cruise speed strictly satisfying (x_a - x_L) / v > t_s - t_a, or
/// +inf when the constraint is vacuous (t_s <= t_a).
template <typename Scalar>
Scalar cruise_speed_bound(const ShockwaveParams<Scalar>& p) {
  auto t = analytic_times(p);
  Scalar slack = t.t_s - t.t_a;
  if (slack <= Scalar(0)) {
    return std::numeric_limits<Scalar>::infinity();
  }
  return (p.x_a - t.x_L) / slack;
}

template <typename Scalar>
bool satisfies_cruise_condition(const ShockwaveParams<Scalar>& p, Scalar v_cav) {
  auto t = analytic_times(p);
  return (p.x_a - t.x_L) / v_cav > t.t_s - t.t_a;
}

template <typename Scalar = double>
struct NoWaitCheck {
  Scalar lhs{};
  Scalar rhs{};
  bool proceed = false;
};

/// Two-intersection exception: a CAV `offset_past_first` metres past stop
/// line 1 may go without waiting when the downstream queue clears before the
/// EMS arrives.
template <typename Scalar>
NoWaitCheck<Scalar> no_wait_condition(Scalar z, Scalar offset_past_first, Scalar w, Scalar U,
                                      Scalar d, Scalar V) {
  NoWaitCheck<Scalar> out;
  Scalar remaining = z - offset_past_first;
  out.lhs = remaining / w + remaining / U;
  out.rhs = d / w + d / V;
  out.proceed = out.lhs <= out.rhs;
  return out;
}

template <typename Scalar = double>
struct OracleTimes {
  Scalar T_ev{};
  Scalar T_cav{};
};

/// Closed-form travel times with instantaneous speed changes. Times are to
/// the final stop line of the network.
template <typename Scalar>
OracleTimes<Scalar> oracle_times(const ShockwaveParams<Scalar>& p, NetworkKind kind) {
  auto t = analytic_times(p);
  OracleTimes<Scalar> out;
  if (kind == NetworkKind::OneIntersection) {
    out.T_ev = t.t_ev;
    out.T_cav = cav_travel_time_single(p);
    return out;
  }
  out.T_ev = t.t_ev + p.z / p.V;
  if (p.x_a >= Scalar(0)) {
    out.T_cav = cav_travel_time_single(p) + p.z / p.U;
    return out;
  }
  Scalar remaining = p.z + p.x_a;
  auto check = no_wait_condition(p.z, -p.x_a, p.w, p.U, p.d, p.V);
  if (check.proceed) {
    out.T_cav = check.lhs;
  } else {
    using std::max;
    Scalar ems_reaches_cav = t.t_ev + (p.z - remaining) / p.V;
    out.T_cav = max(remaining / p.w, ems_reaches_cav) + remaining / p.U;
  }
  return out;
}

}  // namespace corridor
