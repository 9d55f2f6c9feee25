#include "corridor/scenario/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "corridor/error.hpp"

namespace corridor {

void to_json(nlohmann::json& j, const ScenarioSpec& spec) {
  j = nlohmann::json{{"network", std::string(to_string(spec.network))},
                     {"x_a", spec.x_a},
                     {"d", spec.d},
                     {"inflow_vph", spec.inflow_vph},
                     {"seed", spec.seed},
                     {"horizon_steps", spec.horizon_steps}};
}

void from_json(const nlohmann::json& j, ScenarioSpec& spec) {
  ScenarioSpec out;
  out.network = parse_network_kind(j.at("network").get<std::string>());
  out.x_a = j.at("x_a").get<double>();
  out.d = j.at("d").get<double>();
  out.inflow_vph = j.value("inflow_vph", out.inflow_vph);
  out.seed = j.value("seed", out.seed);
  out.horizon_steps = j.value("horizon_steps", out.horizon_steps);
  spec = out;
}

namespace {

void validate(const ScenarioSpec& spec) {
  if (!std::isfinite(spec.x_a) || !std::isfinite(spec.d) || !std::isfinite(spec.inflow_vph)) {
    throw DomainError("scenario: non-finite field");
  }
  if (spec.d < 0.0) throw DomainError("scenario: d must be >= 0");
  if (spec.inflow_vph <= 0.0) throw DomainError("scenario: inflow_vph must be > 0");
  if (spec.horizon_steps <= 0) throw DomainError("scenario: horizon_steps must be > 0");
}

// Jam lattice through `anchor`, restricted to [0, depth].
std::vector<double> lattice(double anchor, double depth, double spacing) {
  std::vector<double> out;
  double first = anchor - spacing * std::floor(anchor / spacing + 1e-9);
  if (first < 0.0) first = 0.0;
  for (double dist = first; dist <= depth + 1e-9; dist += spacing) {
    out.push_back(dist);
  }
  // Re-anchor exactly so the CAV/EMS slot matches its requested distance.
  for (auto& dist : out) {
    if (std::abs(dist - anchor) < 1e-6) dist = anchor;
  }
  return out;
}

}  // namespace

InitialState build_initial_state(const ScenarioSpec& spec, const ScenarioOptions& options) {
  validate(spec);
  InitialState state;
  state.network = CorridorNetwork::make(spec.network);
  const auto& net = state.network;
  const double vehicle_length = 5.0;
  const double max_dist = net.approach_length - vehicle_length;
  const double spacing = options.jam_spacing;
  const double tail = spacing * options.extra_queue_slots;

  if (spec.d > max_dist) {
    throw InfeasibleScenario(fmt::format("EMS distance d={} exceeds the approach ({} m)", spec.d, max_dist));
  }
  std::size_t cav_segment = 0;
  double cav_dist = spec.x_a;
  if (spec.x_a < 0.0) {
    if (net.intersection_count() < 2) {
      throw InfeasibleScenario("negative x_a requires the two-intersection network");
    }
    cav_segment = 1;
    cav_dist = net.z() + spec.x_a;
  }
  if (cav_dist < 0.0 || cav_dist > max_dist) {
    throw InfeasibleScenario(fmt::format("CAV position x_a={} lies outside an approach", spec.x_a));
  }

  struct Slot {
    std::size_t segment;
    int lane;
    double anchor;
    double depth;
  };
  std::vector<Slot> slots;
  double depth0 = std::min(max_dist, std::max(spec.d, cav_segment == 0 ? cav_dist : 0.0) + tail);
  double left0 = cav_segment == 0 ? cav_dist : std::fmod(spec.d, spacing);
  slots.push_back({0, kLeftLane, left0, depth0});
  slots.push_back({0, kRightLane, spec.d, depth0});
  if (net.intersection_count() > 1) {
    double depth1 = std::min(max_dist, (cav_segment == 1 ? cav_dist : 0.0) + tail);
    double left1 = cav_segment == 1 ? cav_dist : std::fmod(spec.x_a, spacing);
    slots.push_back({1, kLeftLane, left1, depth1});
    slots.push_back({1, kRightLane, std::fmod(left1, spacing), depth1});
  }

  Vehicle ems;
  ems.id = kEmsId;
  ems.cls = VehicleClass::Ems;
  ems.lane = kRightLane;
  ems.position = net.stop_line(0) - spec.d;
  Vehicle cav;
  cav.id = kCavId;
  cav.cls = VehicleClass::Cav;
  cav.lane = kLeftLane;
  cav.position = net.stop_line(cav_segment) - cav_dist;
  state.vehicles = {ems, cav};

  VehicleId next = 2;
  for (const auto& slot : slots) {
    QueueLayout layout{slot.lane, slot.segment, lattice(slot.anchor, slot.depth, spacing)};
    for (double dist : layout.distances) {
      bool is_ems = slot.segment == 0 && slot.lane == kRightLane && dist == spec.d;
      bool is_cav = slot.segment == cav_segment && slot.lane == kLeftLane && dist == cav_dist;
      if (is_ems || is_cav) continue;
      Vehicle h;
      h.id = next++;
      h.cls = VehicleClass::Human;
      h.lane = slot.lane;
      h.position = net.stop_line(slot.segment) - dist;
      state.vehicles.push_back(h);
    }
    state.queues.push_back(std::move(layout));
  }
  state.arrivals = inflow_schedule(spec, options);
  return state;
}

std::vector<Arrival> inflow_schedule(const ScenarioSpec& spec, const ScenarioOptions& options) {
  if (!(spec.inflow_vph > 0.0) || !std::isfinite(spec.inflow_vph)) {
    throw DomainError("inflow_schedule: inflow_vph must be positive");
  }
  const double headway = 3600.0 / spec.inflow_vph;
  const double horizon = spec.horizon_steps * options.sim.dt;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-options.arrival_jitter_s, options.arrival_jitter_s);
  std::vector<Arrival> out;
  for (long k = 1;; ++k) {
    double t = static_cast<double>(k) * headway;
    if (t > horizon) break;
    if (options.arrival_jitter_s > 0.0) t = std::max(0.0, t + jitter(rng));
    out.push_back(Arrival{t, static_cast<int>((k - 1) % 2)});
  }
  return out;
}

Simulation make_simulation(const ScenarioSpec& spec, const ScenarioOptions& options) {
  InitialState state = build_initial_state(spec, options);
  SignalProgram program = options.program;
  program.phase_offset_s.resize(state.network.intersection_count(), 0.0);
  Simulation sim(state.network, program, options.sim);
  for (const auto& v : state.vehicles) {
    sim.add_vehicle(v);
  }
  sim.schedule_arrivals(std::move(state.arrivals));
  return sim;
}

std::vector<ScenarioSpec> make_grid(const std::vector<double>& x_a_values,
                                    const std::vector<double>& d_values, const ScenarioSpec& base) {
  std::vector<ScenarioSpec> out;
  std::set<std::pair<double, double>> seen;
  for (double x_a : x_a_values) {
    for (double d : d_values) {
      if (!seen.emplace(x_a, d).second) continue;
      ScenarioSpec spec = base;
      spec.x_a = x_a;
      spec.d = d;
      out.push_back(spec);
    }
  }
  return out;
}

std::vector<double> default_x_a_axis(NetworkKind kind) {
  if (kind == NetworkKind::OneIntersection) {
    return {1.0, 8.5, 16.0, 23.5, 31.0, 38.5, 46.0};
  }
  return {-191.0, -183.5, -176.0, 1.0, 8.5, 16.0, 23.5, 31.0};
}

std::vector<double> default_d_axis(NetworkKind kind) {
  if (kind == NetworkKind::OneIntersection) {
    return {1.0, 8.5, 16.0, 23.5, 31.0, 38.5, 46.0};
  }
  return {1.0, 8.5, 16.0, 23.5, 31.0};
}

}  // namespace corridor
