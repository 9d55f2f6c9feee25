#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "corridor/error.hpp"
#include "corridor/rl/mlp.hpp"

namespace corridor {

struct ActionBounds {
  double a_min = -3.0;
  double a_max = 3.0;
};

/// Squashed Gaussian policy: u ~ N(mlp(s), exp(log_std)^2), action =
/// mid + half * tanh(u). The log-std is state independent.
template <typename Scalar>
class GaussianPolicy {
 public:
  using Net = Mlp<Scalar>;
  using Matrix = typename Net::Matrix;
  using Vector = typename Net::Vector;

  struct Sample {
    Scalar pre_squash;
    Scalar action;
    Scalar log_prob;  // of pre_squash under the Gaussian
  };

  GaussianPolicy() = default;
  GaussianPolicy(Net net, Scalar log_std, ActionBounds bounds = {})
      : net_(std::move(net)), log_std_(log_std), bounds_(bounds) {
    if (!(bounds_.a_min < bounds_.a_max)) throw DomainError("policy: a_min must be < a_max");
  }

  /// obs_dim -> hidden... -> 1, final layer zeroed so the initial mean is 0.
  template <typename Rng>
  static GaussianPolicy make(int obs_dim, const std::vector<int>& hidden, Rng& rng,
                             Scalar log_std = Scalar(std::log(0.5)), ActionBounds bounds = {}) {
    std::vector<int> sizes{obs_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    return GaussianPolicy(Net(sizes, rng, true), log_std, bounds);
  }

  const Net& net() const { return net_; }
  Scalar log_std() const { return log_std_; }
  const ActionBounds& bounds() const { return bounds_; }

  Scalar squash(Scalar u) const {
    using std::tanh;
    Scalar mid = Scalar((bounds_.a_max + bounds_.a_min) / 2.0);
    Scalar half = Scalar((bounds_.a_max - bounds_.a_min) / 2.0);
    return mid + half * tanh(u);
  }

  /// Pre-squash means, one per column of `obs`.
  Vector means(const Matrix& obs) const {
    check_finite(obs);
    return net_.forward(obs).row(0).transpose();
  }

  Scalar act_deterministic(const Vector& obs) const {
    return squash(means(Matrix(obs))(0));
  }

  template <typename Rng>
  Sample sample(const Vector& obs, Rng& rng) const {
    Scalar mean = means(Matrix(obs))(0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Scalar u = mean + std::exp(log_std_) * Scalar(normal(rng));
    return Sample{u, squash(u), log_prob(u, mean)};
  }

  Scalar log_prob(Scalar u, Scalar mean) const {
    Scalar z = (u - mean) / std::exp(log_std_);
    return Scalar(-0.5) * z * z - log_std_ - Scalar(0.5 * std::log(2.0 * std::numbers::pi));
  }

  Vector log_probs(const Matrix& obs, const Vector& u) const {
    Vector mu = means(obs);
    Vector out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = log_prob(u(i), mu(i));
    return out;
  }

  /// Gradient of sum_i weights_i * log N(u_i | mlp(s_i), sigma) w.r.t.
  /// parameters() (network parameters, then log_std).
  Vector weighted_log_prob_gradient(const Matrix& obs, const Vector& u, const Vector& weights) const {
    check_finite(obs);
    typename Net::Cache cache;
    Matrix mu = net_.forward(obs, cache);
    Scalar inv_var = std::exp(Scalar(-2) * log_std_);
    Matrix upstream(1, u.size());
    Scalar dlog_std = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      Scalar diff = u(i) - mu(0, i);
      upstream(0, i) = weights(i) * diff * inv_var;
      dlog_std += weights(i) * (diff * diff * inv_var - Scalar(1));
    }
    Vector grad(parameter_count());
    grad.head(net_.parameter_count()) = net_.backward(cache, upstream);
    grad(grad.size() - 1) = dlog_std;
    return grad;
  }

  Eigen::Index parameter_count() const { return net_.parameter_count() + 1; }

  Vector parameters() const {
    Vector p(parameter_count());
    p.head(net_.parameter_count()) = net_.parameters();
    p(p.size() - 1) = log_std_;
    return p;
  }

  void set_parameters(const Vector& p) {
    net_.set_parameters(p.head(net_.parameter_count()));
    log_std_ = p(p.size() - 1);
  }

 private:
  static void check_finite(const Matrix& obs) {
    if (!obs.allFinite()) throw DomainError("policy: non-finite observation");
  }

  Net net_;
  Scalar log_std_ = Scalar(std::log(0.5));
  ActionBounds bounds_{};
};

/// Adam ascent on a flat parameter vector.
template <typename Scalar>
class Adam {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit Adam(Scalar learning_rate = Scalar(1e-3), Scalar beta1 = Scalar(0.9),
                Scalar beta2 = Scalar(0.999), Scalar eps = Scalar(1e-8))
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  Vector ascend(const Vector& params, const Vector& grad) {
    if (m_.size() != params.size()) {
      m_ = Vector::Zero(params.size());
      v_ = Vector::Zero(params.size());
      t_ = 0;
    }
    ++t_;
    m_ = beta1_ * m_ + (Scalar(1) - beta1_) * grad;
    v_ = beta2_ * v_ + (Scalar(1) - beta2_) * grad.cwiseProduct(grad);
    Scalar c1 = Scalar(1) - std::pow(beta1_, Scalar(t_));
    Scalar c2 = Scalar(1) - std::pow(beta2_, Scalar(t_));
    Vector step = (m_ / c1).array() / ((v_ / c2).array().sqrt() + eps_);
    return params + lr_ * step;
  }

 private:
  Scalar lr_, beta1_, beta2_, eps_;
  Vector m_, v_;
  long t_ = 0;
};

}  // namespace corridor
