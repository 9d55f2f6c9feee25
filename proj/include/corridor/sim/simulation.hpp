#pragma once

#include <deque>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "corridor/sim/idm.hpp"
#include "corridor/sim/network.hpp"
#include "corridor/sim/record.hpp"
#include "corridor/sim/vehicle.hpp"

namespace corridor {

struct SimClock {
  double dt = 0.5;
  long step_index = 0;

  double t() const { return static_cast<double>(step_index) * dt; }
};

struct LaneChangeParams {
  double lookahead_s = 2.0;
  double min_speed_gain = 0.5;
  double cooldown_s = 2.0;
};

struct SimOptions {
  double dt = 0.5;
  bool record_rows = true;
  IdmParams idm{};
  LaneChangeParams lane_change{};
  double vehicle_margin = 0.5;  // minimum bumper gap kept by the safe-speed cap
};

struct Arrival {
  double t = 0.0;
  int lane = kLeftLane;
};

struct AccelCommand {
  VehicleId id = 0;
  double accel = 0.0;
};

struct NeighborState {
  double gap = 0.0;
  double speed = 0.0;
};

struct LaneView {
  std::optional<NeighborState> leader;
  std::optional<NeighborState> follower;
};

/// EMS gap-acceptance rule: switch iff the adjacent lane's projected speed
/// beats the current lane's by `min_speed_gain` and both new gaps are at
/// least s0 and stop-feasible. `stop_line_gap` is set when a Red/Yellow stop
/// line acts as a standing obstacle for the EMS.
bool ems_should_change_lane(double v, double v_desired, const LaneView& current,
                            const LaneView& adjacent, std::optional<double> stop_line_gap,
                            const SimOptions& options);

class Simulation {
 public:
  Simulation(CorridorNetwork network, SignalProgram program, SimOptions options = {});

  void add_vehicle(const Vehicle& vehicle);
  void schedule_arrivals(std::vector<Arrival> arrivals);

  /// Validates the initial state and records step 0. Called implicitly by the
  /// first step().
  void start();
  /// Advances one dt. Commands may only target the CAV; a CAV without a
  /// command drives by IDM.
  void step(std::span<const AccelCommand> commands = {});

  const SimClock& clock() const { return clock_; }
  double time() const { return clock_.t(); }
  const CorridorNetwork& network() const { return network_; }
  const SignalProgram& program() const { return program_; }
  const SimOptions& options() const { return options_; }

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const Vehicle* find(VehicleId id) const;
  std::optional<VehicleId> cav_id() const { return cav_id_; }
  std::optional<VehicleId> ems_id() const { return ems_id_; }
  bool has_exited(VehicleId id) const { return exited_.contains(id); }

  const Vehicle* leader_of(const Vehicle& v) const;
  const Vehicle* follower_of(const Vehicle& v) const;

  /// IDM acceleration with the stop-line rule for `id` at the given desired
  /// speed, before the safe-speed cap.
  double idm_accel_for(VehicleId id, double desired_speed) const;

  const EpisodeRecord& record() const { return record_; }
  EpisodeRecord take_record() { return std::move(record_); }

  /// Throws SimulationFault when a vehicle invariant is broken.
  void check_invariants() const;

 private:
  const Vehicle* lane_leader(int lane, double position, VehicleId exclude) const;
  const Vehicle* lane_follower(int lane, double position, VehicleId exclude) const;
  std::optional<double> stop_line_obstacle(const Vehicle& v) const;
  double desired_accel(const Vehicle& v, double desired_speed, int lane) const;
  double safety_cap(const Vehicle& v, double v_limit) const;
  void maybe_change_ems_lane();
  void insert_arrivals();
  void record_step();

  CorridorNetwork network_;
  SignalProgram program_;
  SimOptions options_;
  SimClock clock_;
  bool started_ = false;

  std::vector<Vehicle> vehicles_;  // ascending id
  std::optional<VehicleId> cav_id_;
  std::optional<VehicleId> ems_id_;
  VehicleId next_id_ = 0;
  std::unordered_set<VehicleId> exited_;
  std::deque<Arrival> pending_;
  std::vector<Arrival> arrivals_;
  std::size_t next_arrival_ = 0;
  double last_lane_change_t_ = -1e9;

  EpisodeRecord record_;
};

}  // namespace corridor
