#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "corridor/sim/network.hpp"
#include "corridor/sim/simulation.hpp"

namespace corridor {

/// One cell of the (x_a, d) experiment family. Distances are measured from
/// stop line 1 against the travel direction; a negative x_a puts the CAV past
/// stop line 1, queued at intersection 2.
struct ScenarioSpec {
  NetworkKind network = NetworkKind::OneIntersection;
  double x_a = 1.0;
  double d = 16.0;
  double inflow_vph = 1000.0;
  std::uint64_t seed = 0;
  int horizon_steps = 600;

  bool operator==(const ScenarioSpec&) const = default;
};

void to_json(nlohmann::json& j, const ScenarioSpec& spec);
void from_json(const nlohmann::json& j, ScenarioSpec& spec);

struct ScenarioOptions {
  double jam_spacing = 7.0;   // front-to-front at standstill
  int extra_queue_slots = 3;  // slots queued behind the deeper of the CAV/EMS
  double arrival_jitter_s = 0.0;
  SimOptions sim{};
  SignalProgram program{};
};

/// Distances to the stop line of one lane segment, ascending.
struct QueueLayout {
  int lane = kLeftLane;
  std::size_t intersection = 0;
  std::vector<double> distances;
};

struct InitialState {
  CorridorNetwork network;
  std::vector<Vehicle> vehicles;  // ascending id; EMS = 0, CAV = 1
  std::vector<QueueLayout> queues;
  std::vector<Arrival> arrivals;
};

inline constexpr VehicleId kEmsId = 0;
inline constexpr VehicleId kCavId = 1;

/// Throws InfeasibleScenario when the CAV or EMS cannot be placed.
InitialState build_initial_state(const ScenarioSpec& spec, const ScenarioOptions& options = {});

/// Deterministic uniform headway of 3600 / inflow_vph, alternating lanes,
/// up to the horizon. Optional jitter draws from a generator seeded by spec.seed.
std::vector<Arrival> inflow_schedule(const ScenarioSpec& spec, const ScenarioOptions& options = {});

Simulation make_simulation(const ScenarioSpec& spec, const ScenarioOptions& options = {});

/// Cartesian grid, each (x_a, d) pair exactly once, row-major in x_a.
std::vector<ScenarioSpec> make_grid(const std::vector<double>& x_a_values,
                                    const std::vector<double>& d_values, const ScenarioSpec& base);

std::vector<double> default_x_a_axis(NetworkKind kind);
std::vector<double> default_d_axis(NetworkKind kind);

}  // namespace corridor
