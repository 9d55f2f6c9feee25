#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "corridor/rl/policy.hpp"

namespace corridor {

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
};

/// Travel times reported by environments that simulate the corridor.
struct EpisodeInfo {
  std::optional<double> ems_travel_time;
  std::optional<double> cav_travel_time;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual int observation_dim() const = 0;
  virtual int horizon() const = 0;
  virtual ActionBounds action_bounds() const { return {}; }

  virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;
  virtual StepResult step(double action) = 0;
  virtual EpisodeInfo info() const { return {}; }
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

/// Point mass on a line: x' = x + 0.1 * a, reward -|x' - target|. The
/// observation is the signed offset to the target.
class ReachTargetEnv final : public Environment {
 public:
  explicit ReachTargetEnv(int horizon = 20) : horizon_(horizon) {}

  int observation_dim() const override { return 1; }
  int horizon() const override { return horizon_; }
  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(double action) override;

 private:
  int horizon_;
  int t_ = 0;
  double x_ = 0.0;
  double target_ = 0.0;
};

}  // namespace corridor
