#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "corridor/rl/rollout.hpp"

namespace corridor {

enum class Algorithm { Ppo, Vpg };

struct TrainConfig {
  Algorithm algorithm = Algorithm::Ppo;
  double gamma = 0.999;
  double learning_rate = 1e-3;
  int horizon = 600;
  int episodes = 2000;
  int workers = 1;
  double clip_ratio = 0.2;
  int episodes_per_iteration = 10;
  int ppo_epochs = 10;
  int eval_every = 10;   // iterations
  int eval_episodes = 10;
  std::vector<int> hidden{32, 32, 32};
  double initial_log_std = -0.6931471805599453;  // log(0.5)
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

struct CurvePoint {
  int iteration = 0;
  int episodes = 0;
  double mean_return = 0.0;
  std::optional<double> eval_return;
  std::optional<double> ems_travel_time;
  std::optional<double> cav_travel_time;
};

struct TrainResult {
  Policy policy;  // best by evaluation return
  Policy final_policy;
  std::vector<CurvePoint> curve;
  double best_eval_return = 0.0;
};

struct TrainHooks {
  /// Called with the last finite policy before a TrainingDivergence escapes.
  std::function<void(const Policy&)> on_abort;
  std::function<void(const CurvePoint&)> on_iteration;
};

/// Deterministic for a fixed config, independent of `workers`.
TrainResult train(const EnvFactory& factory, const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Mean undiscounted return of the deterministic policy over `seeds`.
double evaluate(const EnvFactory& factory, const Policy& policy, const std::vector<std::uint64_t>& seeds,
                int workers);

/// iteration,mean_return,ems_travel_time,cav_travel_time (+ episodes,
/// eval_return); missing values are empty.
void write_learning_curve(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace corridor
