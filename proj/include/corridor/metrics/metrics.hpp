#pragma once

#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "corridor/sim/record.hpp"

namespace corridor {

/// Crossing time of the vehicle's final stop line minus t0; nullopt when the
/// vehicle never crossed within the record (incomplete run).
std::optional<double> travel_time(const EpisodeRecord& rec, VehicleId id, double t0 = 0.0);
std::optional<double> travel_time_ems(const EpisodeRecord& rec, double t0 = 0.0);
std::optional<double> travel_time_cav(const EpisodeRecord& rec, double t0 = 0.0);

enum class ThroughputLanes { Both, Left, Right };

std::string_view to_string(ThroughputLanes lanes);
ThroughputLanes parse_throughput_lanes(std::string_view text);

struct ThroughputResult {
  double q = 0.0;  // veh/s
  int vehicles = 0;
  double headway_sum = 0.0;
  bool degenerate = false;  // no usable headways; q reported as 0
  double window_start = 0.0;
  double window_end = 0.0;
  std::vector<double> headways;
};

/// q = N / sum(h) over crossings at `reference` <= t <= `window_end`; the
/// first headway is measured from `reference`.
ThroughputResult throughput_from_crossings(double reference, double window_end, std::vector<double> crossing_times);

/// Vehicles crossing the EMS's final stop line after the EMS, up to the end
/// of that green+yellow period. nullopt when the EMS never crossed.
std::optional<ThroughputResult> throughput(const EpisodeRecord& rec, ThroughputLanes lanes = ThroughputLanes::Both);

enum class Metric { EmsTime, CavTime, Throughput };

std::string_view to_string(Metric metric);

/// Matrix over (x_a rows, d columns); missing cells are nullopt.
struct Grid {
  std::vector<double> x_a;
  std::vector<double> d;
  std::vector<std::vector<std::optional<double>>> values;

  static Grid empty_like(const std::vector<double>& x_a, const std::vector<double>& d);
};

enum class DiffMode {
  Baseline,   // denominator is b, the baseline (model-based) value
  Symmetric,  // denominator is the mean magnitude of a and b; antisymmetric
};

/// Positive when `a` is better than `b`: smaller for times, larger for
/// throughput. Missing or zero-denominator cells stay missing. Throws
/// DomainError when the axes differ.
Grid percentage_diff_grid(const Grid& a, const Grid& b, Metric metric, DiffMode mode = DiffMode::Baseline);

/// Header "x_a\d,<d values...>", one row per x_a; missing cells empty.
void write_grid_csv(std::ostream& out, const Grid& grid);

struct TimeSpaceFilter {
  int lane = kLeftLane;
  bool include_ems = true;  // EMS kept on every lane
};

/// vehicle_id,t,position,lane,class ordered by vehicle then time.
void write_time_space_csv(std::ostream& out, const EpisodeRecord& rec, const TimeSpaceFilter& filter = {});

}  // namespace corridor
