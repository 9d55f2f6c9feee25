#include "corridor/sim/idm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corridor/error.hpp"

namespace corridor {

double idm_accel(double v, double v_desired, std::optional<LeaderState> leader, const IdmParams& p) {
  if (!std::isfinite(v) || !std::isfinite(v_desired) || v < 0.0 || v_desired <= 0.0) {
    throw DomainError("idm_accel: speed must be finite and non-negative, desired speed positive");
  }
  double free_term = 1.0 - std::pow(v / v_desired, p.exponent);
  double interaction = 0.0;
  if (leader) {
    if (!std::isfinite(leader->gap) || !std::isfinite(leader->closing_speed)) {
      throw DomainError("idm_accel: non-finite leader state");
    }
    if (leader->gap <= 0.0) {
      throw DomainError("idm_accel: gap must be positive, got " + std::to_string(leader->gap));
    }
    double dynamic = v * p.time_headway +
                     v * leader->closing_speed / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
    double desired_gap = p.min_gap + std::max(0.0, dynamic);
    double ratio = desired_gap / leader->gap;
    interaction = ratio * ratio;
  }
  double a = p.max_accel * (free_term - interaction);
  return std::clamp(a, -p.accel_bound, p.accel_bound);
}

double stopping_distance(double v, double decel, double dt) {
  double step = decel * dt;
  if (v <= step) {
    return 0.0;
  }
  // Speeds after each braking step: v - step, v - 2 step, ..., while positive.
  double n = std::floor(v / step);
  if (n * step >= v) {
    n -= 1.0;
  }
  return dt * (n * v - step * n * (n + 1.0) / 2.0);
}

namespace {

double travel_then_stop(double v_next, double decel, double dt) {
  return v_next * dt + stopping_distance(v_next, decel, dt);
}

}  // namespace

double safe_speed(double gap, double obstacle_speed, double margin, double decel, double dt,
                  double v_cap) {
  double budget = gap + stopping_distance(obstacle_speed, decel, dt) - margin;
  if (budget <= 0.0) {
    return 0.0;
  }
  if (travel_then_stop(v_cap, decel, dt) <= budget) {
    return v_cap;
  }
  double lo = 0.0;
  double hi = v_cap;
  for (int i = 0; i < 60 && hi - lo > 1e-9; ++i) {
    double mid = 0.5 * (lo + hi);
    if (travel_then_stop(mid, decel, dt) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

bool can_stop_within(double v, double distance, double decel, double dt) {
  double slowest = std::max(0.0, v - decel * dt);
  return travel_then_stop(slowest, decel, dt) <= distance;
}

}  // namespace corridor
