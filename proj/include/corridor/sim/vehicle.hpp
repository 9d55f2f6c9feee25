#pragma once

#include <cstdint>
#include <string_view>

namespace corridor {

enum class VehicleClass : std::uint8_t { Human, Cav, Ems };

using VehicleId = std::uint32_t;

inline constexpr int kLeftLane = 0;
inline constexpr int kRightLane = 1;

struct Vehicle {
  VehicleId id = 0;
  VehicleClass cls = VehicleClass::Human;
  int lane = kLeftLane;
  double position = 0.0;  // front bumper, corridor axis [m]
  double speed = 0.0;     // [m/s]
  double accel = 0.0;     // last applied [m/s^2]
  double length = 5.0;    // [m]

  double rear() const { return position - length; }
};

std::string_view to_string(VehicleClass cls);
VehicleClass parse_vehicle_class(std::string_view text);

}  // namespace corridor
