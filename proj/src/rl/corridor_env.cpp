#include "corridor/rl/corridor_env.hpp"

#include <cmath>
#include <random>

#include "corridor/error.hpp"

namespace corridor {

CorridorEnv::CorridorEnv(CorridorEnvConfig config) : config_(std::move(config)) {
  if (config_.horizon <= 0) throw ConfigError("environment: horizon must be > 0");
  if (!(config_.gamma > 0.0 && config_.gamma <= 1.0)) throw ConfigError("environment: gamma must lie in (0, 1]");
  if (config_.x_a_range.first > config_.x_a_range.second || config_.d_range.first > config_.d_range.second) {
    throw ConfigError("environment: empty sampling range");
  }
  config_.scenario.sim.record_rows = false;
}

double CorridorEnv::exit_bonus(int steps) const {
  const double u = sim_ ? sim_->network().speed_limits.regular : SpeedLimits{}.regular;
  if (steps <= 0) return 0.0;
  if (config_.gamma == 1.0) return u * steps;
  return u * (1.0 - std::pow(config_.gamma, steps)) / (1.0 - config_.gamma);
}

Eigen::VectorXd CorridorEnv::reset(std::uint64_t seed) {
  if (config_.fixed) {
    spec_ = *config_.fixed;
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xa(config_.x_a_range.first, config_.x_a_range.second);
    std::uniform_real_distribution<double> dd(config_.d_range.first, config_.d_range.second);
    spec_ = ScenarioSpec{};
    spec_.network = config_.network;
    spec_.x_a = xa(rng);
    spec_.d = dd(rng);
    spec_.inflow_vph = config_.inflow_vph;
    spec_.seed = seed;
  }
  spec_.horizon_steps = config_.horizon;
  sim_.emplace(make_simulation(spec_, config_.scenario));
  sim_->start();
  t_ = 0;
  last_obs_ = observe(*sim_, config_.observation);
  return normalize(last_obs_, ObservationScale::of(sim_->network()));
}

StepResult CorridorEnv::step(double action) {
  if (!sim_) throw DomainError("environment: step before reset");
  if (!std::isfinite(action)) throw DomainError("environment: non-finite action");
  StepResult r;
  const auto scale = ObservationScale::of(sim_->network());
  if (sim_->cav_id() && sim_->has_exited(*sim_->cav_id())) {
    r.observation = normalize(last_obs_, scale);
    r.done = true;
    return r;
  }
  const AccelCommand cmd{*sim_->cav_id(), action};
  sim_->step(std::span<const AccelCommand>(&cmd, 1));
  ++t_;
  if (sim_->has_exited(cmd.id)) {
    r.reward = exit_bonus(config_.horizon - t_ + 1);
    r.done = true;
  } else {
    last_obs_ = observe(*sim_, config_.observation);
    r.reward = reward(last_obs_, config_.coefficients, config_.prose_variant);
    r.done = t_ >= config_.horizon;
  }
  r.observation = normalize(last_obs_, scale);
  return r;
}

EpisodeInfo CorridorEnv::info() const {
  EpisodeInfo info;
  if (!sim_) return info;
  const auto& rec = sim_->record();
  const std::size_t k = sim_->network().intersection_count() - 1;
  if (auto id = sim_->ems_id()) info.ems_travel_time = rec.crossing_time(*id, k);
  if (auto id = sim_->cav_id()) info.cav_travel_time = rec.crossing_time(*id, k);
  return info;
}

}  // namespace corridor
