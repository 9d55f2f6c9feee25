#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "corridor/error.hpp"
#include "corridor/metrics/sweep.hpp"

using namespace corridor;

namespace {

EpisodeRecord record_with_crossings(std::vector<CrossingEvent> crossings) {
  EpisodeRecord rec;
  rec.intersection_count = 1;
  rec.stop_lines = {175.0};
  rec.ems_id = 0;
  rec.cav_id = 1;
  rec.crossings = std::move(crossings);
  return rec;
}

Grid grid_of(std::vector<std::vector<std::optional<double>>> v) {
  Grid g;
  g.x_a = {1.0, 2.0};
  g.d = {3.0, 4.0};
  g.values = std::move(v);
  return g;
}

}  // namespace

TEST(TravelTime, DirectDifference) {
  auto rec = record_with_crossings({{0, VehicleClass::Ems, 1, 0, 85, 42.5}, {1, VehicleClass::Cav, 0, 0, 40, 20.0}});
  EXPECT_EQ(travel_time_ems(rec), 42.5);
  EXPECT_EQ(travel_time_cav(rec), 20.0);
}

TEST(TravelTime, CrossingAtHorizonEnd) {
  auto rec = record_with_crossings({{0, VehicleClass::Ems, 1, 0, 600, 300.0}});
  rec.last_step = 600;
  EXPECT_EQ(travel_time_ems(rec), rec.horizon_time());
}

TEST(TravelTime, NeverCrossedIsIncomplete) {
  auto rec = record_with_crossings({});
  EXPECT_FALSE(travel_time_ems(rec));
  EXPECT_FALSE(travel_time_cav(rec));
}

TEST(TravelTime, UsesFinalStopLine) {
  auto rec = record_with_crossings({{0, VehicleClass::Ems, 1, 0, 10, 5.0}, {0, VehicleClass::Ems, 1, 1, 30, 15.0}});
  rec.intersection_count = 2;
  EXPECT_EQ(travel_time_ems(rec), 15.0);
}

TEST(Throughput, DirectRatio) {
  std::vector<double> times;
  for (int i = 1; i <= 10; ++i) times.push_back(3.6 * i);
  auto r = throughput_from_crossings(0.0, 100.0, times);
  EXPECT_EQ(r.vehicles, 10);
  EXPECT_NEAR(r.headway_sum, 36.0, 1e-12);
  EXPECT_NEAR(r.q, 0.2778, 1e-4);
  EXPECT_FALSE(r.degenerate);
}

TEST(Throughput, EmptyWindowIsDegenerate) {
  auto r = throughput_from_crossings(10.0, 37.0, {5.0, 40.0});
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.q, 0.0);
  EXPECT_EQ(r.vehicles, 0);
}

TEST(Throughput, WindowFromEmsCrossingToEndOfPermissivePeriod) {
  auto rec = record_with_crossings({{0, VehicleClass::Ems, 1, 0, 20, 10.0},
                                    {5, VehicleClass::Human, 0, 0, 10, 5.0},
                                    {6, VehicleClass::Human, 0, 0, 24, 12.0},
                                    {7, VehicleClass::Human, 1, 0, 30, 15.0},
                                    {8, VehicleClass::Human, 0, 0, 90, 45.0}});
  auto both = throughput(rec);
  ASSERT_TRUE(both);
  EXPECT_EQ(both->window_start, 10.0);
  EXPECT_EQ(both->window_end, 37.0);
  EXPECT_EQ(both->vehicles, 2);
  EXPECT_NEAR(both->headway_sum, 5.0, 1e-12);  // sum equals last crossing - EMS crossing
  EXPECT_NEAR(both->q, 0.4, 1e-12);
  auto left = throughput(rec, ThroughputLanes::Left);
  EXPECT_EQ(left->vehicles, 1);
  EXPECT_FALSE(throughput(record_with_crossings({})));
}

TEST(PercentageDiff, IdenticalIsZero) {
  auto g = grid_of({{10.0, 12.0}, {8.0, 9.0}});
  auto d = percentage_diff_grid(g, g, Metric::EmsTime);
  for (const auto& row : d.values)
    for (const auto& v : row) EXPECT_EQ(v, 0.0);
}

TEST(PercentageDiff, SignConvention) {
  auto drl = grid_of({{9.0, 1.0}, {1.0, 1.0}});
  auto mb = grid_of({{12.0, 1.0}, {1.0, 1.0}});
  EXPECT_NEAR(*percentage_diff_grid(drl, mb, Metric::CavTime).values[0][0], 25.0, 1e-12);
  auto q_drl = grid_of({{0.6, 1.0}, {1.0, 1.0}});
  auto q_mb = grid_of({{0.5, 1.0}, {1.0, 1.0}});
  EXPECT_NEAR(*percentage_diff_grid(q_drl, q_mb, Metric::Throughput).values[0][0], 20.0, 1e-12);
}

TEST(PercentageDiff, MissingPropagates) {
  auto a = grid_of({{9.0, std::nullopt}, {1.0, 1.0}});
  auto b = grid_of({{12.0, 1.0}, {std::nullopt, 0.0}});
  auto d = percentage_diff_grid(a, b, Metric::EmsTime);
  EXPECT_TRUE(d.values[0][0]);
  EXPECT_FALSE(d.values[0][1]);
  EXPECT_FALSE(d.values[1][0]);
  EXPECT_FALSE(d.values[1][1]);  // zero denominator
}

TEST(PercentageDiff, SymmetricModeIsAntisymmetric) {
  auto a = grid_of({{9.0, 4.0}, {7.5, 1.0}});
  auto b = grid_of({{12.0, 5.0}, {3.0, 2.0}});
  for (auto m : {Metric::EmsTime, Metric::Throughput}) {
    auto ab = percentage_diff_grid(a, b, m, DiffMode::Symmetric);
    auto ba = percentage_diff_grid(b, a, m, DiffMode::Symmetric);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(*ab.values[i][j], -*ba.values[i][j]);
  }
}

TEST(PercentageDiff, AxesMustMatch) {
  auto a = grid_of({{1.0, 1.0}, {1.0, 1.0}});
  auto b = a;
  b.d = {3.0, 5.0};
  EXPECT_THROW(percentage_diff_grid(a, b, Metric::EmsTime), DomainError);
}

TEST(GridCsv, RowsAreXaColumnsAreD) {
  std::ostringstream out;
  write_grid_csv(out, grid_of({{9.0, std::nullopt}, {1.5, 2.0}}));
  EXPECT_EQ(out.str(), "x_a\\d,3,4\n1,9,\n2,1.5,2\n");
}

TEST(TimeSpace, EmptyRecordIsHeaderOnly) {
  std::ostringstream out;
  write_time_space_csv(out, EpisodeRecord{});
  EXPECT_EQ(out.str(), "vehicle_id,t,position,lane,class\n");
}

TEST(TimeSpace, LeftLanePlusEmsMonotone) {
  ScenarioSpec spec;
  spec.network = NetworkKind::TwoIntersection;
  spec.x_a = -191.0;
  spec.d = 8.5;
  ModelBasedController c;
  auto out = run_controlled_episode(spec, c);
  std::ostringstream csv;
  write_time_space_csv(csv, out.record);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  long prev_id = -1;
  double prev_pos = -1e9;
  bool saw_ems_right = false;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string f[5];
    for (auto& s : f) std::getline(row, s, ',');
    long id = std::stol(f[0]);
    double pos = std::stod(f[2]);
    int lane = std::stoi(f[3]);
    if (id != kEmsId) ASSERT_EQ(lane, kLeftLane);
    if (id == kEmsId && lane == kRightLane) saw_ems_right = true;
    if (id == prev_id) ASSERT_GE(pos, prev_pos);
    prev_id = id;
    prev_pos = pos;
  }
  EXPECT_TRUE(saw_ems_right);
}

TEST(EpisodeCsv, HeaderAndOrder) {
  ScenarioSpec spec;
  spec.horizon_steps = 4;
  IdmBaselineController c;
  auto out = run_controlled_episode(spec, c);
  std::ostringstream csv;
  write_episode_csv(csv, out.record);
  std::istringstream in(csv.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "step,t,vehicle_id,class,lane,position,speed,accel,signal_state_1,signal_state_2");
  for (std::size_t i = 1; i < out.record.rows.size(); ++i) {
    const auto& a = out.record.rows[i - 1];
    const auto& b = out.record.rows[i];
    ASSERT_TRUE(a.step < b.step || (a.step == b.step && a.id < b.id));
  }
}

TEST(RecordEvents, CrossingsMatchPositionChanges) {
  ScenarioSpec spec;
  spec.x_a = 8.5;
  spec.d = 23.5;
  IdmBaselineController c;
  auto out = run_controlled_episode(spec, c);
  const auto& rec = out.record;
  ASSERT_FALSE(rec.crossings.empty());
  for (const auto& ev : rec.crossings) {
    const RecordRow* before = nullptr;
    const RecordRow* after = nullptr;
    for (const auto& r : rec.rows) {
      if (r.id != ev.id) continue;
      if (r.step == ev.step - 1) before = &r;
      if (r.step == ev.step) after = &r;
    }
    ASSERT_NE(before, nullptr);
    const double line = rec.stop_lines[ev.intersection];
    EXPECT_LE(before->position, line);
    if (after) EXPECT_GT(after->position, line);
  }
}
