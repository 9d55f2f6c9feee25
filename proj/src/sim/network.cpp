#include "corridor/sim/network.hpp"

#include <cmath>
#include <string>

#include "corridor/error.hpp"

namespace corridor {

std::string_view to_string(VehicleClass cls) {
  switch (cls) {
    case VehicleClass::Human: return "human";
    case VehicleClass::Cav: return "cav";
    case VehicleClass::Ems: return "ems";
  }
  return "?";
}

VehicleClass parse_vehicle_class(std::string_view text) {
  if (text == "human") return VehicleClass::Human;
  if (text == "cav") return VehicleClass::Cav;
  if (text == "ems") return VehicleClass::Ems;
  throw DomainError("unknown vehicle class '" + std::string(text) + "'");
}

std::string_view to_string(SignalPhase phase) {
  switch (phase) {
    case SignalPhase::Green: return "G";
    case SignalPhase::Yellow: return "Y";
    case SignalPhase::Red: return "R";
  }
  return "?";
}

namespace {

double cycle_time(const SignalProgram& program, double t, std::size_t intersection) {
  double offset = intersection < program.phase_offset_s.size() ? program.phase_offset_s[intersection] : 0.0;
  double cycle = program.cycle();
  double tau = std::fmod(t - offset, cycle);
  if (tau < 0.0) {
    tau += cycle;
  }
  return tau;
}

}  // namespace

SignalPhase signal_state(const SignalProgram& program, double t, std::size_t intersection) {
  double tau = cycle_time(program, t, intersection);
  if (tau < program.green_s) return SignalPhase::Green;
  if (tau < program.green_s + program.yellow_s) return SignalPhase::Yellow;
  return SignalPhase::Red;
}

double permissive_period_end(const SignalProgram& program, double t, std::size_t intersection) {
  double tau = cycle_time(program, t, intersection);
  double go = program.green_s + program.yellow_s;
  if (tau < go) {
    return t + (go - tau);
  }
  return t + (program.cycle() - tau) + go;
}

std::string_view to_string(NetworkKind kind) {
  return kind == NetworkKind::OneIntersection ? "OneIntersection" : "TwoIntersection";
}

NetworkKind parse_network_kind(std::string_view text) {
  if (text == "OneIntersection") return NetworkKind::OneIntersection;
  if (text == "TwoIntersection") return NetworkKind::TwoIntersection;
  throw DomainError("unknown network '" + std::string(text) +
                    "' (expected OneIntersection or TwoIntersection)");
}

CorridorNetwork CorridorNetwork::make(NetworkKind kind) {
  CorridorNetwork net;
  net.kind = kind;
  return net;
}

std::optional<std::size_t> CorridorNetwork::next_stop_line(double position) const {
  for (std::size_t k = 0; k < intersection_count(); ++k) {
    if (position <= stop_line(k)) {
      return k;
    }
  }
  return std::nullopt;
}

bool CorridorNetwork::inside_box(double position) const {
  for (std::size_t k = 0; k < intersection_count(); ++k) {
    if (position > stop_line(k) && position < stop_line(k) + box_width) {
      return true;
    }
  }
  return false;
}

}  // namespace corridor
