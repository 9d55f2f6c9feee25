#pragma once

#include <optional>
#include <utility>

#include "corridor/rl/env.hpp"
#include "corridor/rl/observation.hpp"
#include "corridor/rl/reward.hpp"
#include "corridor/scenario/scenario.hpp"

namespace corridor {

struct CorridorEnvConfig {
  NetworkKind network = NetworkKind::OneIntersection;
  /// Per-episode x_a and d are drawn uniformly from these ranges unless
  /// `fixed` is set.
  std::pair<double, double> x_a_range{1.0, 46.0};
  std::pair<double, double> d_range{1.0, 46.0};
  std::optional<ScenarioSpec> fixed;
  double inflow_vph = 1000.0;
  int horizon = 600;
  double gamma = 0.999;  // for the exit bonus
  RewardCoefficients coefficients = RewardCoefficients::single_intersection();
  bool prose_variant = false;
  ObservationConfig observation{};
  ScenarioOptions scenario{};
};

/// The CAV's POMDP. The episode ends when the CAV leaves the network or at
/// the horizon. Leaving early earns the discounted value of cruising at U for
/// the remaining steps, so finishing sooner is never worse than dawdling.
class CorridorEnv final : public Environment {
 public:
  explicit CorridorEnv(CorridorEnvConfig config);

  int observation_dim() const override { return Observation::kDim; }
  int horizon() const override { return config_.horizon; }

  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(double action) override;
  EpisodeInfo info() const override;

  const ScenarioSpec& spec() const { return spec_; }
  const Simulation& simulation() const { return *sim_; }
  const CorridorEnvConfig& config() const { return config_; }

  /// Discounted reward of cruising at U for `steps` steps.
  double exit_bonus(int steps) const;

 private:
  CorridorEnvConfig config_;
  ScenarioSpec spec_;
  std::optional<Simulation> sim_;
  Observation last_obs_;
  int t_ = 0;
};

}  // namespace corridor
