#include "corridor/sim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "corridor/error.hpp"

namespace corridor {

namespace {

constexpr double kStopLineMargin = 1e-6;

double projected_speed(double v, double v_desired, double accel, double lookahead) {
  return std::clamp(v + accel * lookahead, 0.0, v_desired);
}

bool stop_feasible(double follower_speed, double gap, double leader_speed, const SimOptions& o) {
  double slowest = std::max(0.0, follower_speed - o.idm.comfort_decel * o.dt);
  double travel = slowest * o.dt + stopping_distance(slowest, o.idm.comfort_decel, o.dt);
  return travel <= gap + stopping_distance(leader_speed, o.idm.comfort_decel, o.dt) - o.vehicle_margin;
}

double lane_accel(double v, double v_desired, const LaneView& lane, std::optional<double> stop_gap,
                  const IdmParams& p) {
  std::optional<LeaderState> leader;
  if (lane.leader) {
    leader = LeaderState{std::max(lane.leader->gap, 1e-6), v - lane.leader->speed};
  }
  double a = idm_accel(v, v_desired, leader, p);
  if (stop_gap) {
    double a_stop = *stop_gap > 1e-9 ? idm_accel(v, v_desired, LeaderState{*stop_gap, v}, p)
                                     : -p.accel_bound;
    a = std::min(a, a_stop);
  }
  return a;
}

}  // namespace

bool ems_should_change_lane(double v, double v_desired, const LaneView& current,
                            const LaneView& adjacent, std::optional<double> stop_line_gap,
                            const SimOptions& options) {
  const auto& lc = options.lane_change;
  double gain = projected_speed(v, v_desired,
                                lane_accel(v, v_desired, adjacent, stop_line_gap, options.idm),
                                lc.lookahead_s) -
                projected_speed(v, v_desired,
                                lane_accel(v, v_desired, current, stop_line_gap, options.idm),
                                lc.lookahead_s);
  if (gain <= lc.min_speed_gain) {
    return false;
  }
  if (adjacent.leader) {
    if (adjacent.leader->gap < options.idm.min_gap ||
        !stop_feasible(v, adjacent.leader->gap, adjacent.leader->speed, options)) {
      return false;
    }
  }
  if (adjacent.follower) {
    if (adjacent.follower->gap < options.idm.min_gap ||
        !stop_feasible(adjacent.follower->speed, adjacent.follower->gap, v, options)) {
      return false;
    }
  }
  return true;
}

Simulation::Simulation(CorridorNetwork network, SignalProgram program, SimOptions options)
    : network_(network), program_(std::move(program)), options_(options) {
  clock_.dt = options_.dt;
  record_.dt = options_.dt;
  record_.intersection_count = network_.intersection_count();
  for (std::size_t k = 0; k < network_.intersection_count(); ++k) {
    record_.stop_lines.push_back(network_.stop_line(k));
  }
  record_.program = program_;
}

void Simulation::add_vehicle(const Vehicle& vehicle) {
  if (started_) {
    throw DomainError("add_vehicle: simulation already started");
  }
  if (!std::isfinite(vehicle.position) || !std::isfinite(vehicle.speed)) {
    throw DomainError("add_vehicle: non-finite state");
  }
  if (vehicle.lane < 0 || vehicle.lane >= network_.lanes_per_direction) {
    throw DomainError("add_vehicle: lane out of range");
  }
  if (vehicle.speed < 0.0 || vehicle.speed > network_.speed_limits.of(vehicle.cls)) {
    throw DomainError(fmt::format("add_vehicle: speed {} outside the class limit", vehicle.speed));
  }
  if (find(vehicle.id) != nullptr) {
    throw DomainError(fmt::format("add_vehicle: duplicate id {}", vehicle.id));
  }
  if (vehicle.cls == VehicleClass::Cav) {
    if (cav_id_) throw DomainError("add_vehicle: only one CAV is supported");
    cav_id_ = vehicle.id;
  }
  if (vehicle.cls == VehicleClass::Ems) {
    if (ems_id_) throw DomainError("add_vehicle: only one EMS vehicle is supported");
    ems_id_ = vehicle.id;
  }
  auto it = std::lower_bound(vehicles_.begin(), vehicles_.end(), vehicle.id,
                             [](const Vehicle& v, VehicleId id) { return v.id < id; });
  vehicles_.insert(it, vehicle);
  next_id_ = std::max(next_id_, vehicle.id + 1);
  record_.ems_id = ems_id_;
  record_.cav_id = cav_id_;
}

void Simulation::schedule_arrivals(std::vector<Arrival> arrivals) {
  std::stable_sort(arrivals.begin(), arrivals.end(),
                   [](const Arrival& a, const Arrival& b) { return a.t < b.t; });
  arrivals_ = std::move(arrivals);
  next_arrival_ = 0;
}

void Simulation::start() {
  if (started_) {
    return;
  }
  started_ = true;
  check_invariants();
  record_step();
}

const Vehicle* Simulation::find(VehicleId id) const {
  auto it = std::lower_bound(vehicles_.begin(), vehicles_.end(), id,
                             [](const Vehicle& v, VehicleId key) { return v.id < key; });
  return (it != vehicles_.end() && it->id == id) ? &*it : nullptr;
}

const Vehicle* Simulation::lane_leader(int lane, double position, VehicleId exclude) const {
  const Vehicle* best = nullptr;
  for (const auto& v : vehicles_) {
    if (v.lane != lane || v.id == exclude || v.position <= position) continue;
    if (best == nullptr || v.position < best->position) best = &v;
  }
  return best;
}

const Vehicle* Simulation::lane_follower(int lane, double position, VehicleId exclude) const {
  const Vehicle* best = nullptr;
  for (const auto& v : vehicles_) {
    if (v.lane != lane || v.id == exclude || v.position > position) continue;
    if (best == nullptr || v.position > best->position) best = &v;
  }
  return best;
}

const Vehicle* Simulation::leader_of(const Vehicle& v) const {
  return lane_leader(v.lane, v.position, v.id);
}

const Vehicle* Simulation::follower_of(const Vehicle& v) const {
  return lane_follower(v.lane, v.position, v.id);
}

std::optional<double> Simulation::stop_line_obstacle(const Vehicle& v) const {
  auto k = network_.next_stop_line(v.position);
  if (!k) return std::nullopt;
  if (signal_state(program_, time(), *k) == SignalPhase::Green) return std::nullopt;
  double gap = network_.stop_line(*k) - v.position;
  if (!can_stop_within(v.speed, gap, options_.idm.comfort_decel, options_.dt)) {
    return std::nullopt;
  }
  return gap;
}

double Simulation::desired_accel(const Vehicle& v, double desired_speed, int lane) const {
  LaneView view;
  if (const Vehicle* lead = lane_leader(lane, v.position, v.id)) {
    view.leader = NeighborState{lead->rear() - v.position, lead->speed};
  }
  return lane_accel(v.speed, desired_speed, view, stop_line_obstacle(v), options_.idm);
}

double Simulation::idm_accel_for(VehicleId id, double desired_speed) const {
  const Vehicle* v = find(id);
  if (v == nullptr) {
    throw DomainError(fmt::format("idm_accel_for: unknown vehicle {}", id));
  }
  return desired_accel(*v, desired_speed, v->lane);
}

double Simulation::safety_cap(const Vehicle& v, double v_limit) const {
  const auto& o = options_;
  double v_safe = v_limit;
  if (const Vehicle* lead = leader_of(v)) {
    v_safe = std::min(v_safe, safe_speed(lead->rear() - v.position, lead->speed, o.vehicle_margin,
                                         o.idm.comfort_decel, o.dt, v_limit));
  }
  if (auto gap = stop_line_obstacle(v)) {
    v_safe = std::min(v_safe, safe_speed(*gap, 0.0, kStopLineMargin, o.idm.comfort_decel, o.dt, v_limit));
  }
  return (v_safe - v.speed) / o.dt;
}

void Simulation::maybe_change_ems_lane() {
  if (!ems_id_) return;
  auto it = std::find_if(vehicles_.begin(), vehicles_.end(),
                         [&](const Vehicle& v) { return v.id == *ems_id_; });
  if (it == vehicles_.end()) return;
  Vehicle& ems = *it;
  if (ems.position >= network_.final_stop_line()) return;
  if (time() - last_lane_change_t_ < options_.lane_change.cooldown_s) return;

  auto view_of = [&](int lane) {
    LaneView view;
    if (const Vehicle* lead = lane_leader(lane, ems.position, ems.id)) {
      view.leader = NeighborState{lead->rear() - ems.position, lead->speed};
    }
    if (const Vehicle* fol = lane_follower(lane, ems.position, ems.id)) {
      view.follower = NeighborState{ems.rear() - fol->position, fol->speed};
    }
    return view;
  };
  int target = 1 - ems.lane;
  double v_desired = network_.speed_limits.of(VehicleClass::Ems);
  if (!ems_should_change_lane(ems.speed, v_desired, view_of(ems.lane), view_of(target),
                              stop_line_obstacle(ems), options_)) {
    return;
  }
  record_.lane_changes.push_back(
      LaneChangeEvent{ems.id, clock_.step_index, time(), ems.lane, target, ems.position});
  ems.lane = target;
  last_lane_change_t_ = time();
}

void Simulation::step(std::span<const AccelCommand> commands) {
  start();
  for (const auto& cmd : commands) {
    const Vehicle* v = find(cmd.id);
    if (v == nullptr) {
      throw DomainError(fmt::format("step: command for unknown vehicle {}", cmd.id));
    }
    if (v->cls != VehicleClass::Cav) {
      throw DomainError(fmt::format("step: command for non-CAV vehicle {}", cmd.id));
    }
    if (!std::isfinite(cmd.accel)) {
      throw DomainError("step: non-finite acceleration command");
    }
  }

  maybe_change_ems_lane();

  const double bound = options_.idm.accel_bound;
  std::vector<double> accel(vehicles_.size());
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    const Vehicle& v = vehicles_[i];
    double limit = network_.speed_limits.of(v.cls);
    double a = 0.0;
    auto cmd = std::find_if(commands.begin(), commands.end(),
                            [&](const AccelCommand& c) { return c.id == v.id; });
    if (cmd != commands.end()) {
      a = std::clamp(cmd->accel, -bound, bound);
    } else {
      a = desired_accel(v, limit, v.lane);
    }
    a = std::min(a, safety_cap(v, limit));
    accel[i] = std::clamp(a, -bound, bound);
  }

  const double dt = options_.dt;
  const long next_step = clock_.step_index + 1;
  const double next_t = static_cast<double>(next_step) * dt;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    Vehicle& v = vehicles_[i];
    double limit = network_.speed_limits.of(v.cls);
    double prev = v.position;
    v.accel = accel[i];
    v.speed = std::clamp(v.speed + accel[i] * dt, 0.0, limit);
    v.position = prev + v.speed * dt;
    for (std::size_t k = 0; k < network_.intersection_count(); ++k) {
      double sl = network_.stop_line(k);
      if (prev <= sl && v.position > sl) {
        record_.crossings.push_back(CrossingEvent{v.id, v.cls, v.lane, k, next_step, next_t});
      }
    }
  }
  std::erase_if(vehicles_, [&](const Vehicle& v) {
    if (v.position > network_.end()) {
      exited_.insert(v.id);
      return true;
    }
    return false;
  });

  clock_.step_index = next_step;
  insert_arrivals();
  check_invariants();
  record_step();
}

void Simulation::insert_arrivals() {
  while (next_arrival_ < arrivals_.size() && arrivals_[next_arrival_].t <= time() + 1e-9) {
    pending_.push_back(arrivals_[next_arrival_++]);
  }
  std::deque<Arrival> still_pending;
  std::array<bool, 2> lane_blocked{false, false};
  for (const auto& arrival : pending_) {
    int lane = arrival.lane;
    if (lane_blocked[static_cast<std::size_t>(lane)]) {
      still_pending.push_back(arrival);
      continue;
    }
    const double entry = 0.0;
    double limit = network_.speed_limits.regular;
    double speed = limit;
    const Vehicle* last = lane_leader(lane, entry - 1e-9, std::numeric_limits<VehicleId>::max());
    if (last != nullptr) {
      double gap = last->rear() - entry;
      if (gap < options_.idm.min_gap) {
        lane_blocked[static_cast<std::size_t>(lane)] = true;
        still_pending.push_back(arrival);
        continue;
      }
      speed = safe_speed(gap, last->speed, options_.vehicle_margin + options_.idm.min_gap,
                         options_.idm.comfort_decel, options_.dt, limit);
    }
    Vehicle v;
    v.id = next_id_++;
    v.cls = VehicleClass::Human;
    v.lane = lane;
    v.position = entry;
    v.speed = speed;
    vehicles_.push_back(v);
  }
  pending_ = std::move(still_pending);
}

void Simulation::check_invariants() const {
  const double bound = options_.idm.accel_bound;
  for (const auto& v : vehicles_) {
    double limit = network_.speed_limits.of(v.cls);
    if (!(v.speed >= 0.0 && v.speed <= limit + 1e-9)) {
      throw SimulationFault(fmt::format("vehicle {} speed {} outside [0, {}] at step {}", v.id,
                                        v.speed, limit, clock_.step_index));
    }
    if (!(v.accel >= -bound - 1e-12 && v.accel <= bound + 1e-12)) {
      throw SimulationFault(fmt::format("vehicle {} accel {} out of bounds at step {}", v.id,
                                        v.accel, clock_.step_index));
    }
    if (const Vehicle* lead = leader_of(v)) {
      double gap = lead->rear() - v.position;
      if (!(gap > 0.0)) {
        throw SimulationFault(fmt::format("collision: vehicle {} behind {} with gap {} at step {}",
                                          v.id, lead->id, gap, clock_.step_index));
      }
    }
  }
}

void Simulation::record_step() {
  record_.last_step = clock_.step_index;
  std::array<SignalPhase, 2> phases{signal_state(program_, time(), 0), SignalPhase::Green};
  if (network_.intersection_count() > 1) {
    phases[1] = signal_state(program_, time(), 1);
  }
  record_.signals.push_back(phases);
  if (!options_.record_rows) return;
  for (const auto& v : vehicles_) {
    record_.rows.push_back(RecordRow{clock_.step_index, time(), v.id, v.cls, v.lane, v.position,
                                     v.speed, v.accel});
  }
}

}  // namespace corridor
