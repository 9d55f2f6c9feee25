#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "corridor/error.hpp"
#include "corridor/rl/policy.hpp"

namespace corridor {

/// One episode: observations as columns, pre-squash samples, and rewards.
template <typename Scalar>
struct Trajectory {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix observations;  // obs_dim x T
  Vector pre_squash;    // T
  Vector actions;       // T
  Vector log_probs;     // T, behaviour policy
  Vector rewards;       // T

  Eigen::Index length() const { return rewards.size(); }
};

/// G_t = r_t + gamma * G_{t+1}, G_T = 0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> returns_to_go(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rewards,
                                                      Scalar gamma) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g(rewards.size());
  Scalar acc = 0;
  for (Eigen::Index t = rewards.size(); t-- > 0;) {
    acc = rewards(t) + gamma * acc;
    g(t) = acc;
  }
  return g;
}

namespace detail {

template <typename Scalar>
void require_finite(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v, const std::string& what) {
  if (!v.allFinite()) {
    Eigen::Index bad = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!std::isfinite(static_cast<double>(v(i)))) ++bad;
    }
    throw TrainingDivergence(what + ": " + std::to_string(bad) + " of " + std::to_string(v.size()) +
                             " entries are non-finite");
  }
}

}  // namespace detail

/// (1/N) sum_traj sum_t log pi(u_t | s_t) * G_t. Its gradient is the
/// vanilla policy-gradient estimate.
template <typename Scalar>
Scalar vpg_surrogate(const GaussianPolicy<Scalar>& policy, const std::vector<Trajectory<Scalar>>& batch,
                     Scalar gamma) {
  if (batch.empty()) return Scalar(0);
  Scalar total = 0;
  for (const auto& traj : batch) {
    if (traj.length() == 0) continue;
    auto g = returns_to_go<Scalar>(traj.rewards, gamma);
    total += policy.log_probs(traj.observations, traj.pre_squash).dot(g);
  }
  return total / Scalar(batch.size());
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vpg_gradient(const GaussianPolicy<Scalar>& policy,
                                                     const std::vector<Trajectory<Scalar>>& batch,
                                                     Scalar gamma) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(policy.parameter_count());
  if (batch.empty()) return grad;
  for (const auto& traj : batch) {
    if (traj.length() == 0) continue;
    auto g = returns_to_go<Scalar>(traj.rewards, gamma);
    grad += policy.weighted_log_prob_gradient(traj.observations, traj.pre_squash, g);
  }
  return grad / Scalar(batch.size());
}

/// theta <- theta + lr * grad.
template <typename Scalar>
void vpg_update(GaussianPolicy<Scalar>& policy, const std::vector<Trajectory<Scalar>>& batch, Scalar gamma,
                Scalar learning_rate) {
  auto grad = vpg_gradient(policy, batch, gamma);
  detail::require_finite<Scalar>(grad, "vpg gradient");
  policy.set_parameters(policy.parameters() + learning_rate * grad);
}

template <typename Scalar>
struct PpoBatch {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix observations;
  Vector pre_squash;
  Vector old_log_probs;
  Vector advantages;

  Eigen::Index size() const { return advantages.size(); }
};

/// Flattens trajectories. Advantage = G_t minus the mean G over trajectories
/// at the same timestep, then normalized to zero mean / unit variance.
template <typename Scalar>
PpoBatch<Scalar> make_ppo_batch(const std::vector<Trajectory<Scalar>>& trajs, Scalar gamma, bool normalize = true) {
  PpoBatch<Scalar> b;
  Eigen::Index total = 0;
  Eigen::Index longest = 0;
  Eigen::Index dim = 0;
  for (const auto& t : trajs) {
    total += t.length();
    longest = std::max(longest, t.length());
    if (t.length() > 0) dim = t.observations.rows();
  }
  b.observations.resize(dim, total);
  b.pre_squash.resize(total);
  b.old_log_probs.resize(total);
  b.advantages.resize(total);

  std::vector<typename PpoBatch<Scalar>::Vector> returns;
  typename PpoBatch<Scalar>::Vector sum = PpoBatch<Scalar>::Vector::Zero(longest);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(longest);
  for (const auto& t : trajs) {
    returns.push_back(returns_to_go<Scalar>(t.rewards, gamma));
    sum.head(t.length()) += returns.back();
    count.head(t.length()).array() += 1;
  }

  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& t = trajs[i];
    Eigen::Index n = t.length();
    if (n == 0) continue;
    b.observations.middleCols(offset, n) = t.observations;
    b.pre_squash.segment(offset, n) = t.pre_squash;
    b.old_log_probs.segment(offset, n) = t.log_probs;
    for (Eigen::Index k = 0; k < n; ++k) {
      b.advantages(offset + k) = returns[i](k) - sum(k) / Scalar(count(k));
    }
    offset += n;
  }
  if (normalize && total > 1) {
    Scalar mean = b.advantages.mean();
    Scalar var = (b.advantages.array() - mean).square().mean();
    b.advantages = (b.advantages.array() - mean) / (std::sqrt(var) + Scalar(1e-8));
  }
  return b;
}

template <typename Scalar>
struct PpoObjective {
  Scalar clipped{};    // mean of min(r A, clip(r) A)
  Scalar unclipped{};  // mean of r A
};

template <typename Scalar>
PpoObjective<Scalar> ppo_objective(const GaussianPolicy<Scalar>& policy, const PpoBatch<Scalar>& b,
                                   Scalar clip_ratio) {
  PpoObjective<Scalar> out;
  if (b.size() == 0) return out;
  auto logp = policy.log_probs(b.observations, b.pre_squash);
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    Scalar r = std::exp(logp(i) - b.old_log_probs(i));
    Scalar a = b.advantages(i);
    Scalar rc = std::clamp(r, Scalar(1) - clip_ratio, Scalar(1) + clip_ratio);
    out.unclipped += r * a;
    out.clipped += std::min(r * a, rc * a);
  }
  out.clipped /= Scalar(b.size());
  out.unclipped /= Scalar(b.size());
  return out;
}

/// Gradient of the clipped surrogate. Samples whose clipped term is the
/// active minimum contribute nothing.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ppo_gradient(const GaussianPolicy<Scalar>& policy,
                                                     const PpoBatch<Scalar>& b, Scalar clip_ratio) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (b.size() == 0) return Vector::Zero(policy.parameter_count());
  auto logp = policy.log_probs(b.observations, b.pre_squash);
  Vector weights(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    Scalar r = std::exp(logp(i) - b.old_log_probs(i));
    Scalar a = b.advantages(i);
    Scalar rc = std::clamp(r, Scalar(1) - clip_ratio, Scalar(1) + clip_ratio);
    // d(r A) = r A dlogp; the clipped branch is constant in theta
    weights(i) = (r * a <= rc * a) ? r * a : Scalar(0);
  }
  return policy.weighted_log_prob_gradient(b.observations, b.pre_squash, weights) / Scalar(b.size());
}

template <typename Scalar>
void ppo_update(GaussianPolicy<Scalar>& policy, Adam<Scalar>& optimizer, const PpoBatch<Scalar>& b,
                Scalar clip_ratio, int epochs) {
  for (int e = 0; e < epochs; ++e) {
    auto grad = ppo_gradient(policy, b, clip_ratio);
    detail::require_finite<Scalar>(grad, "ppo gradient");
    auto next = optimizer.ascend(policy.parameters(), grad);
    detail::require_finite<Scalar>(next, "ppo parameters");
    policy.set_parameters(next);
  }
}

}  // namespace corridor
