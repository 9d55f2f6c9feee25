#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "corridor/control/shockwave.hpp"
#include "corridor/rl/observation.hpp"
#include "corridor/rl/rollout.hpp"
#include "corridor/scenario/scenario.hpp"

namespace corridor {

/// IDM acceleration of the CAV (stop-line rule included) for a desired speed.
using IdmHook = std::function<double(double desired_speed)>;

struct ControllerContext {
  ScenarioSpec spec;
  CorridorNetwork network;
};

class CavController {
 public:
  virtual ~CavController() = default;
  virtual std::string_view name() const = 0;
  /// Called once at t0, before the first act().
  virtual void reset(const ControllerContext& ctx) = 0;
  virtual double act(const Observation& obs, const IdmHook& idm) = 0;
};

/// Do-nothing baseline: the CAV drives like a human vehicle.
class IdmBaselineController final : public CavController {
 public:
  std::string_view name() const override { return "idm_baseline"; }
  void reset(const ControllerContext& ctx) override { u_ = ctx.network.speed_limits.regular; }
  double act(const Observation&, const IdmHook& idm) override { return idm(u_); }

 private:
  double u_ = 15.0;
};

/// Shockwave-theoretic controller. Branch is fixed at t0 from (x_a, d):
///   Hold    - stay stationary until the EMS has gone by;
///   Cruise  - discharge with a capped desired speed so the CAV does not
///             reach the split point before the EMS does;
///   NoWait  - two-intersection case where the downstream queue clears
///             before the EMS arrives.
class ModelBasedController final : public CavController {
 public:
  enum class Branch { Hold, Cruise, NoWait };
  enum class Phase { Waiting, Released };

  explicit ModelBasedController(double w = 10.0, double release_lead = 20.0)
      : w_(w), release_lead_(release_lead) {}

  std::string_view name() const override { return "model_based"; }
  void reset(const ControllerContext& ctx) override;
  double act(const Observation& obs, const IdmHook& idm) override;

  Branch branch() const { return branch_; }
  Phase phase() const { return phase_; }
  const ShockwaveParams<double>& params() const { return params_; }
  std::optional<double> cruise_speed() const { return cruise_speed_; }
  /// Desired speed handed to IDM on the last act() while cruising.
  std::optional<double> last_commanded_cruise() const { return last_cruise_; }

 private:
  bool ems_has_passed(const Observation& obs);

  double w_;
  double release_lead_;
  ShockwaveParams<double> params_{};
  Branch branch_ = Branch::Hold;
  Phase phase_ = Phase::Waiting;
  double u_ = 15.0;
  double min_accel_ = -3.0;
  double first_stop_line_ = 0.0;
  bool ems_was_behind_ = false;
  std::optional<double> cruise_speed_;
  std::optional<double> last_cruise_;
};

std::string_view to_string(ModelBasedController::Branch branch);

/// Deterministic (squashed-mean) policy on normalized observations.
class PolicyController final : public CavController {
 public:
  explicit PolicyController(Policy policy) : policy_(std::move(policy)) {}

  std::string_view name() const override { return "policy"; }
  void reset(const ControllerContext& ctx) override { scale_ = ObservationScale::of(ctx.network); }
  double act(const Observation& obs, const IdmHook& idm) override;

 private:
  Policy policy_;
  ObservationScale scale_{};
};

/// Uniform random acceleration within the action bounds.
class RandomController final : public CavController {
 public:
  explicit RandomController(std::uint64_t seed, ActionBounds bounds = {}) : seed_(seed), bounds_(bounds) {}

  std::string_view name() const override { return "random"; }
  void reset(const ControllerContext& ctx) override { rng_.seed(seed_ ^ ctx.spec.seed); }
  double act(const Observation&, const IdmHook&) override {
    return std::uniform_real_distribution<double>(bounds_.a_min, bounds_.a_max)(rng_);
  }

 private:
  std::uint64_t seed_;
  ActionBounds bounds_;
  std::mt19937_64 rng_;
};

}  // namespace corridor
