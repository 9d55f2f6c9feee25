#pragma once

#include <cstdint>
#include <vector>

#include "corridor/rl/env.hpp"
#include "corridor/rl/policy_gradient.hpp"

namespace corridor {

using Policy = GaussianPolicy<double>;

struct Episode {
  Trajectory<double> trajectory;
  double total_return = 0.0;  // undiscounted
  EpisodeInfo info;
};

/// Runs one episode to termination or the environment horizon. The
/// environment seed and the action-noise stream both derive from `seed`.
Episode run_episode(Environment& env, const Policy& policy, std::uint64_t seed, bool deterministic);

/// Episodes seeds[i] -> result[i] on up to `workers` threads, each owning an
/// environment from `factory`. Results do not depend on the worker count.
std::vector<Episode> collect(const EnvFactory& factory, const Policy& policy,
                             const std::vector<std::uint64_t>& seeds, bool deterministic, int workers);

/// Stable per-episode seed.
std::uint64_t episode_seed(std::uint64_t base, std::uint64_t index);

}  // namespace corridor
