#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "corridor/error.hpp"
#include "corridor/rl/train.hpp"

using namespace corridor;

namespace {

using Vec = Eigen::VectorXd;

Policy random_policy(std::uint64_t seed, int in, std::vector<int> hidden) {
  std::mt19937_64 rng(seed);
  auto p = Policy::make(in, hidden, rng, -0.3);
  Vec params = p.parameters();
  std::normal_distribution<double> n(0.0, 0.5);
  for (Eigen::Index i = 0; i < params.size(); ++i) params(i) = n(rng);
  p.set_parameters(params);
  return p;
}

std::vector<Trajectory<double>> random_batch(const Policy& p, std::uint64_t seed, int n_traj, int len) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Trajectory<double>> out;
  const auto dim = p.net().input_dim();
  for (int k = 0; k < n_traj; ++k) {
    Trajectory<double> t;
    int T = len + k;
    t.observations.resize(dim, T);
    t.pre_squash.resize(T);
    t.actions.resize(T);
    t.log_probs.resize(T);
    t.rewards.resize(T);
    for (int s = 0; s < T; ++s) {
      for (Eigen::Index r = 0; r < dim; ++r) t.observations(r, s) = n(rng);
      auto smp = p.sample(Vec(t.observations.col(s)), rng);
      t.pre_squash(s) = smp.pre_squash;
      t.actions(s) = smp.action;
      t.log_probs(s) = smp.log_prob;
      t.rewards(s) = n(rng);
    }
    out.push_back(std::move(t));
  }
  return out;
}

template <typename F>
Vec central_differences(Policy p, F objective, double eps = 1e-4) {
  Vec theta = p.parameters();
  Vec g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Vec plus = theta, minus = theta;
    plus(i) += eps;
    minus(i) -= eps;
    p.set_parameters(plus);
    double fp = objective(p);
    p.set_parameters(minus);
    double fm = objective(p);
    g(i) = (fp - fm) / (2 * eps);
  }
  return g;
}

double max_relative_error(const Vec& a, const Vec& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double scale = std::max({std::abs(a(i)), std::abs(b(i)), 1e-6});
    worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  return worst;
}

class ConstantBandit final : public Environment {
 public:
  int observation_dim() const override { return 1; }
  int horizon() const override { return 1; }
  Eigen::VectorXd reset(std::uint64_t) override { return Vec::Ones(1); }
  StepResult step(double) override { return {Vec::Ones(1), 1.0, true}; }
};

}  // namespace

TEST(ReturnsToGo, SatisfiesRecursion) {
  Vec r(6);
  r << 1.0, -2.0, 0.5, 3.0, 0.0, 7.25;
  const double gamma = 0.9;
  Vec g = returns_to_go<double>(r, gamma);
  EXPECT_EQ(g(5), r(5));
  for (int t = 0; t < 5; ++t) EXPECT_EQ(g(t), r(t) + gamma * g(t + 1));
}

TEST(Vpg, ZeroRewardGivesZeroUpdate) {
  auto p = random_policy(1, 9, {4});
  auto batch = random_batch(p, 2, 1, 1);
  batch[0].rewards.setZero();
  Vec before = p.parameters();
  vpg_update(p, batch, 0.999, 1e-3);
  EXPECT_EQ(p.parameters(), before);
}

TEST(Vpg, GradientMatchesFiniteDifferences) {
  auto p = random_policy(3, 9, {4});
  auto batch = random_batch(p, 4, 3, 5);
  const double gamma = 0.95;
  Vec analytic = vpg_gradient(p, batch, gamma);
  Vec numeric = central_differences(p, [&](const Policy& q) { return vpg_surrogate(q, batch, gamma); });
  EXPECT_LT(max_relative_error(analytic, numeric), 1e-4);
}

TEST(Vpg, UpdateIsPlainAscent) {
  auto p = random_policy(5, 3, {4});
  auto batch = random_batch(p, 6, 2, 4);
  Vec expected = p.parameters() + 0.01 * vpg_gradient(p, batch, 0.99);
  vpg_update(p, batch, 0.99, 0.01);
  EXPECT_TRUE(p.parameters().isApprox(expected, 1e-14));
}

TEST(Vpg, NanGradientRaisesDivergence) {
  auto p = random_policy(7, 3, {4});
  auto batch = random_batch(p, 8, 1, 3);
  batch[0].rewards(1) = std::nan("");
  EXPECT_THROW(vpg_update(p, batch, 0.99, 0.01), TrainingDivergence);
}

TEST(Vpg, ConstantRewardBanditMeanStaysCentred) {
  EnvFactory factory = [] { return std::make_unique<ConstantBandit>(); };
  std::vector<double> means;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    auto p = Policy::make(1, {4}, rng);
    for (int it = 0; it < 20; ++it) {
      std::vector<std::uint64_t> seeds;
      for (int k = 0; k < 8; ++k) seeds.push_back(episode_seed(seed, it * 8 + k));
      auto eps = collect(factory, p, seeds, false, 1);
      std::vector<Trajectory<double>> trajs;
      for (auto& e : eps) {
        ASSERT_EQ(e.total_return, 1.0);
        trajs.push_back(e.trajectory);
      }
      vpg_update(p, trajs, 1.0, 0.01);
    }
    means.push_back(p.means(Eigen::MatrixXd::Ones(1, 1))(0));
  }
  double m = 0.0, v = 0.0;
  for (double x : means) m += x;
  m /= means.size();
  for (double x : means) v += (x - m) * (x - m);
  double se = std::sqrt(v / (means.size() - 1) / means.size());
  EXPECT_LT(std::abs(m), 4.0 * se + 1e-12);
}

TEST(Ppo, FreshBatchClippedEqualsUnclipped) {
  auto p = random_policy(9, 9, {4});
  auto batch = make_ppo_batch(random_batch(p, 10, 4, 6), 0.99);
  auto obj = ppo_objective(p, batch, 0.2);
  EXPECT_NEAR(obj.clipped, obj.unclipped, 1e-12);
}

TEST(Ppo, SaturatedRatioHasZeroGradient) {
  auto p = random_policy(11, 9, {4});
  auto batch = make_ppo_batch(random_batch(p, 12, 2, 5), 0.99, false);
  const double clip = 0.2;
  Vec logp = p.log_probs(batch.observations, batch.pre_squash);
  // positive advantages with r = 1 + 2 clip
  batch.advantages = batch.advantages.cwiseAbs().array() + 0.1;
  batch.old_log_probs = logp.array() - std::log(1.0 + 2.0 * clip);
  EXPECT_EQ(ppo_gradient(p, batch, clip).norm(), 0.0);
  // negative advantages with r = 1 - 2 clip
  batch.advantages = -batch.advantages;
  batch.old_log_probs = logp.array() - std::log(1.0 - 2.0 * clip);
  EXPECT_EQ(ppo_gradient(p, batch, clip).norm(), 0.0);
}

TEST(Ppo, GradientMatchesFiniteDifferencesInsideClipRange) {
  auto p = random_policy(13, 9, {4});
  auto batch = make_ppo_batch(random_batch(p, 14, 3, 4), 0.99);
  Vec analytic = ppo_gradient(p, batch, 0.2);
  Vec numeric = central_differences(p, [&](const Policy& q) { return ppo_objective(q, batch, 0.2).clipped; });
  EXPECT_LT(max_relative_error(analytic, numeric), 1e-4);
}

TEST(Ppo, AdvantagesNormalised) {
  auto p = random_policy(15, 3, {4});
  auto batch = make_ppo_batch(random_batch(p, 16, 5, 7), 0.99);
  EXPECT_NEAR(batch.advantages.mean(), 0.0, 1e-12);
  double var = (batch.advantages.array() - batch.advantages.mean()).square().mean();
  EXPECT_NEAR(var, 1.0, 1e-6);
}

TEST(Ppo, ReachTargetImprovesAcrossSeeds) {
  EnvFactory factory = [] { return std::make_unique<ReachTargetEnv>(20); };
  std::vector<std::uint64_t> eval_seeds;
  for (int i = 0; i < 20; ++i) eval_seeds.push_back(episode_seed(12345, i));
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.hidden = {16, 16};
    cfg.gamma = 0.99;
    cfg.learning_rate = 3e-3;
    cfg.horizon = 20;
    cfg.episodes_per_iteration = 8;
    cfg.episodes = 200 * cfg.episodes_per_iteration;
    cfg.eval_every = 1000;
    cfg.eval_episodes = 1;
    cfg.ppo_epochs = 5;
    auto result = train(factory, cfg);
    TrainConfig untrained = cfg;
    untrained.episodes = 0;
    auto initial = train(factory, untrained).policy;
    double before = evaluate(factory, initial, eval_seeds, 1);
    double after = evaluate(factory, result.final_policy, eval_seeds, 1);
    if (after > before) ++improved;
  }
  EXPECT_GE(improved, 95);
}
