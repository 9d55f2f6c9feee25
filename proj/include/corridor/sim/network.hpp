#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "corridor/sim/vehicle.hpp"

namespace corridor {

enum class SignalPhase { Green, Yellow, Red };

std::string_view to_string(SignalPhase phase);

/// Fixed-time plan for the corridor direction. Every intersection runs the
/// same green/yellow/red split, shifted by its own offset.
struct SignalProgram {
  double green_s = 31.0;
  double yellow_s = 6.0;
  double red_s = 37.0;
  std::vector<double> phase_offset_s{0.0, 0.0};

  double cycle() const { return green_s + yellow_s + red_s; }
};

/// Phase of intersection `intersection` at time `t` (seconds since t0).
SignalPhase signal_state(const SignalProgram& program, double t, std::size_t intersection);

/// Start time of the next red at or after `t`, i.e. the end of the
/// green+yellow period containing `t` when `t` is not red.
double permissive_period_end(const SignalProgram& program, double t, std::size_t intersection);

enum class NetworkKind { OneIntersection, TwoIntersection };

std::string_view to_string(NetworkKind kind);
NetworkKind parse_network_kind(std::string_view text);

struct SpeedLimits {
  double regular = 15.0;
  double ems = 35.0;

  double of(VehicleClass cls) const { return cls == VehicleClass::Ems ? ems : regular; }
};

/// Straight two-lane corridor. Coordinates increase in the travel direction;
/// segment k spans [k * (approach + box), k * (approach + box) + approach]
/// and ends at the stop line of intersection k. After the last intersection
/// an exit link of one approach length leads to the network end.
struct CorridorNetwork {
  NetworkKind kind = NetworkKind::OneIntersection;
  double approach_length = 175.0;
  double box_width = 17.0;
  int lanes_per_direction = 2;
  SpeedLimits speed_limits{};

  static CorridorNetwork make(NetworkKind kind);

  std::size_t intersection_count() const { return kind == NetworkKind::OneIntersection ? 1 : 2; }
  /// Distance between consecutive stop lines.
  double z() const { return approach_length + box_width; }
  double stop_line(std::size_t k) const { return approach_length + static_cast<double>(k) * z(); }
  double final_stop_line() const { return stop_line(intersection_count() - 1); }
  double end() const { return final_stop_line() + box_width + approach_length; }

  /// Index of the first stop line at or ahead of `position`, if any.
  std::optional<std::size_t> next_stop_line(double position) const;
  bool inside_box(double position) const;
};

}  // namespace corridor
