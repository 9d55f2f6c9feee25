#include "corridor/sim/record.hpp"

#include <fmt/format.h>

namespace corridor {

std::optional<double> EpisodeRecord::crossing_time(VehicleId id, std::size_t intersection) const {
  for (const auto& c : crossings) {
    if (c.id == id && c.intersection == intersection) {
      return c.t;
    }
  }
  return std::nullopt;
}

void write_episode_csv(std::ostream& out, const EpisodeRecord& record) {
  out << "step,t,vehicle_id,class,lane,position,speed,accel,signal_state_1,signal_state_2\n";
  for (const auto& r : record.rows) {
    const auto& phases = record.signals.at(static_cast<std::size_t>(r.step));
    std::string_view second = record.intersection_count > 1 ? to_string(phases[1]) : "-";
    out << fmt::format("{},{:.1f},{},{},{},{:.6f},{:.6f},{:.6f},{},{}\n", r.step, r.t, r.id,
                       to_string(r.cls), r.lane, r.position, r.speed, r.accel,
                       to_string(phases[0]), second);
  }
}

}  // namespace corridor
