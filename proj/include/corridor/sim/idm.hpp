#pragma once

#include <optional>

namespace corridor {

struct IdmParams {
  double time_headway = 1.0;  // T [s]
  double min_gap = 2.0;       // s0 [m]
  double max_accel = 3.0;     // a [m/s^2]
  double comfort_decel = 3.0; // b [m/s^2]
  double exponent = 4.0;      // delta
  double accel_bound = 3.0;   // |accel| clamp applied to every command
};

struct LeaderState {
  double gap;           // bumper-to-bumper [m], > 0
  double closing_speed; // v - v_leader [m/s]
};

/// Intelligent Driver Model acceleration, clamped to +-accel_bound.
/// `leader` empty means free road. Throws DomainError on non-finite input,
/// negative speed or a non-positive gap.
double idm_accel(double v, double v_desired, std::optional<LeaderState> leader,
                 const IdmParams& p = {});

/// Distance covered after the current step when braking at `decel` every
/// step under the semi-implicit Euler scheme (v' = max(0, v - b dt), x' = x + v' dt).
double stopping_distance(double v, double decel, double dt);

/// Largest next-step speed in [0, v_cap] after which the vehicle can still
/// stop behind an obstacle `gap` ahead that is itself braking from
/// `obstacle_speed`, keeping `margin`. Returns 0 when no speed is safe.
double safe_speed(double gap, double obstacle_speed, double margin, double decel, double dt,
                  double v_cap);

/// True when braking at `decel` from the next step on stops the front bumper
/// within `distance`.
bool can_stop_within(double v, double distance, double decel, double dt);

}  // namespace corridor
