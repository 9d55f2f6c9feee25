#include "corridor/rl/rollout.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace corridor {

std::uint64_t episode_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 over the pair
  std::uint64_t z = base * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Episode run_episode(Environment& env, const Policy& policy, std::uint64_t seed, bool deterministic) {
  std::mt19937_64 rng(episode_seed(seed, 0xA5A5));
  const int horizon = env.horizon();
  const int dim = env.observation_dim();
  Eigen::MatrixXd obs(dim, horizon);
  Eigen::VectorXd u(horizon), a(horizon), logp(horizon), rewards(horizon);

  Eigen::VectorXd s = env.reset(seed);
  int t = 0;
  while (t < horizon) {
    obs.col(t) = s;
    if (deterministic) {
      Eigen::VectorXd mu = policy.means(Eigen::MatrixXd(s));
      u(t) = mu(0);
      a(t) = policy.squash(mu(0));
      logp(t) = policy.log_prob(mu(0), mu(0));
    } else {
      auto sample = policy.sample(s, rng);
      u(t) = sample.pre_squash;
      a(t) = sample.action;
      logp(t) = sample.log_prob;
    }
    StepResult r = env.step(a(t));
    rewards(t) = r.reward;
    ++t;
    s = std::move(r.observation);
    if (r.done) break;
  }

  Episode ep;
  ep.trajectory.observations = obs.leftCols(t);
  ep.trajectory.pre_squash = u.head(t);
  ep.trajectory.actions = a.head(t);
  ep.trajectory.log_probs = logp.head(t);
  ep.trajectory.rewards = rewards.head(t);
  ep.total_return = ep.trajectory.rewards.sum();
  ep.info = env.info();
  return ep;
}

std::vector<Episode> collect(const EnvFactory& factory, const Policy& policy,
                             const std::vector<std::uint64_t>& seeds, bool deterministic, int workers) {
  std::vector<Episode> out(seeds.size());
  const std::size_t n_threads =
      std::min<std::size_t>(std::max(1, workers), std::max<std::size_t>(1, seeds.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    try {
      auto env = factory();
      for (std::size_t i = next++; i < seeds.size(); i = next++) {
        out[i] = run_episode(*env, policy, seeds[i], deterministic);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = seeds.size();
    }
  };

  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace corridor
