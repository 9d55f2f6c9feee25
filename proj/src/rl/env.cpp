#include "corridor/rl/env.hpp"

#include <cmath>
#include <random>

namespace corridor {

Eigen::VectorXd ReachTargetEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  x_ = pos(rng);
  target_ = pos(rng);
  t_ = 0;
  return Eigen::VectorXd::Constant(1, x_ - target_);
}

StepResult ReachTargetEnv::step(double action) {
  x_ += 0.1 * action;
  ++t_;
  StepResult r;
  r.observation = Eigen::VectorXd::Constant(1, x_ - target_);
  r.reward = -std::abs(x_ - target_);
  r.done = t_ >= horizon_;
  return r;
}

}  // namespace corridor
