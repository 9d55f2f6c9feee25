#include "corridor/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "corridor/error.hpp"

namespace corridor {

std::optional<double> travel_time(const EpisodeRecord& rec, VehicleId id, double t0) {
  if (rec.intersection_count == 0) return std::nullopt;
  auto t = rec.crossing_time(id, rec.intersection_count - 1);
  if (!t) return std::nullopt;
  return *t - t0;
}

std::optional<double> travel_time_ems(const EpisodeRecord& rec, double t0) {
  if (!rec.ems_id) return std::nullopt;
  return travel_time(rec, *rec.ems_id, t0);
}

std::optional<double> travel_time_cav(const EpisodeRecord& rec, double t0) {
  if (!rec.cav_id) return std::nullopt;
  return travel_time(rec, *rec.cav_id, t0);
}

std::string_view to_string(ThroughputLanes lanes) {
  switch (lanes) {
    case ThroughputLanes::Both:
      return "both";
    case ThroughputLanes::Left:
      return "left";
    case ThroughputLanes::Right:
      return "right";
  }
  return "?";
}

ThroughputLanes parse_throughput_lanes(std::string_view text) {
  if (text == "both") return ThroughputLanes::Both;
  if (text == "left") return ThroughputLanes::Left;
  if (text == "right") return ThroughputLanes::Right;
  throw ConfigError(fmt::format("unknown throughput lane selection '{}'", text));
}

ThroughputResult throughput_from_crossings(double reference, double window_end, std::vector<double> crossing_times) {
  ThroughputResult r;
  r.window_start = reference;
  r.window_end = window_end;
  std::sort(crossing_times.begin(), crossing_times.end());
  double prev = reference;
  for (double t : crossing_times) {
    if (t < reference || t > window_end) continue;
    r.headways.push_back(t - prev);
    prev = t;
  }
  r.vehicles = static_cast<int>(r.headways.size());
  for (double h : r.headways) r.headway_sum += h;
  if (r.vehicles == 0 || r.headway_sum <= 0.0) {
    r.degenerate = true;
    r.q = 0.0;
  } else {
    r.q = r.vehicles / r.headway_sum;
  }
  return r;
}

std::optional<ThroughputResult> throughput(const EpisodeRecord& rec, ThroughputLanes lanes) {
  if (!rec.ems_id || rec.intersection_count == 0) return std::nullopt;
  const std::size_t k = rec.intersection_count - 1;
  auto t_ems = rec.crossing_time(*rec.ems_id, k);
  if (!t_ems) return std::nullopt;
  const double end = permissive_period_end(rec.program, *t_ems, k);
  std::vector<double> times;
  for (const auto& c : rec.crossings) {
    if (c.intersection != k || c.id == *rec.ems_id) continue;
    if (lanes == ThroughputLanes::Left && c.lane != kLeftLane) continue;
    if (lanes == ThroughputLanes::Right && c.lane != kRightLane) continue;
    times.push_back(c.t);
  }
  return throughput_from_crossings(*t_ems, end, std::move(times));
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::EmsTime:
      return "ems_time";
    case Metric::CavTime:
      return "cav_time";
    case Metric::Throughput:
      return "throughput";
  }
  return "?";
}

Grid Grid::empty_like(const std::vector<double>& x_a, const std::vector<double>& d) {
  Grid g{x_a, d, {}};
  g.values.assign(x_a.size(), std::vector<std::optional<double>>(d.size()));
  return g;
}

Grid percentage_diff_grid(const Grid& a, const Grid& b, Metric metric, DiffMode mode) {
  if (a.x_a != b.x_a || a.d != b.d || a.values.size() != b.values.size()) {
    throw DomainError("percentage_diff_grid: grids have different axes");
  }
  Grid out = Grid::empty_like(a.x_a, a.d);
  const bool higher_is_better = metric == Metric::Throughput;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.values[i].size() != b.values[i].size() || a.values[i].size() != a.d.size()) {
      throw DomainError("percentage_diff_grid: ragged grid");
    }
    for (std::size_t j = 0; j < a.values[i].size(); ++j) {
      const auto& va = a.values[i][j];
      const auto& vb = b.values[i][j];
      if (!va || !vb) continue;
      double denom = mode == DiffMode::Baseline ? *vb : 0.5 * (std::abs(*va) + std::abs(*vb));
      if (denom == 0.0) continue;
      double num = higher_is_better ? *va - *vb : *vb - *va;
      out.values[i][j] = 100.0 * num / denom;
    }
  }
  return out;
}

void write_grid_csv(std::ostream& out, const Grid& grid) {
  out << "x_a\\d";
  for (double d : grid.d) out << fmt::format(",{}", d);
  out << '\n';
  for (std::size_t i = 0; i < grid.x_a.size(); ++i) {
    out << fmt::format("{}", grid.x_a[i]);
    for (std::size_t j = 0; j < grid.d.size(); ++j) {
      out << ',';
      if (i < grid.values.size() && j < grid.values[i].size() && grid.values[i][j]) {
        out << fmt::format("{}", *grid.values[i][j]);
      }
    }
    out << '\n';
  }
}

void write_time_space_csv(std::ostream& out, const EpisodeRecord& rec, const TimeSpaceFilter& filter) {
  out << "vehicle_id,t,position,lane,class\n";
  std::vector<const RecordRow*> rows;
  for (const auto& r : rec.rows) {
    bool is_ems = rec.ems_id && r.id == *rec.ems_id;
    if (r.lane == filter.lane || (is_ems && filter.include_ems)) rows.push_back(&r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RecordRow* x, const RecordRow* y) {
    return x->id != y->id ? x->id < y->id : x->step < y->step;
  });
  for (const auto* r : rows) {
    out << fmt::format("{},{},{},{},{}\n", r->id, r->t, r->position, r->lane, to_string(r->cls));
  }
}

}  // namespace corridor
