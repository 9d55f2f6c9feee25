#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "corridor/sim/network.hpp"
#include "corridor/sim/vehicle.hpp"

namespace corridor {

struct RecordRow {
  long step = 0;
  double t = 0.0;
  VehicleId id = 0;
  VehicleClass cls = VehicleClass::Human;
  int lane = 0;
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;
};

struct CrossingEvent {
  VehicleId id = 0;
  VehicleClass cls = VehicleClass::Human;
  int lane = 0;
  std::size_t intersection = 0;
  long step = 0;
  double t = 0.0;
};

struct LaneChangeEvent {
  VehicleId id = 0;
  long step = 0;
  double t = 0.0;
  int from_lane = 0;
  int to_lane = 0;
  double position = 0.0;
};

/// Per-step trajectory log plus event log of one episode. t0 (the green onset
/// of intersection 1) is t = 0.
struct EpisodeRecord {
  double dt = 0.5;
  std::size_t intersection_count = 1;
  std::vector<double> stop_lines;
  SignalProgram program;
  std::optional<VehicleId> ems_id;
  std::optional<VehicleId> cav_id;
  long last_step = 0;

  std::vector<RecordRow> rows;  // step-major, then vehicle id
  std::vector<std::array<SignalPhase, 2>> signals;  // indexed by step
  std::vector<CrossingEvent> crossings;
  std::vector<LaneChangeEvent> lane_changes;

  double horizon_time() const { return static_cast<double>(last_step) * dt; }
  std::optional<double> crossing_time(VehicleId id, std::size_t intersection) const;
};

/// CSV with columns step,t,vehicle_id,class,lane,position,speed,accel,
/// signal_state_1,signal_state_2. Single-intersection records write "-" in
/// the second signal column.
void write_episode_csv(std::ostream& out, const EpisodeRecord& record);

}  // namespace corridor
