#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace corridor {

/// Fully connected network with tanh hidden layers and a linear output.
/// Inputs are column-major batches (features x samples).
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix weight;  // out x in
    Vector bias;    // out
  };

  struct Cache {
    std::vector<Matrix> activations;  // input, then each layer's output
  };

  Mlp() = default;

  /// Glorot-uniform weights, zero biases. `zero_output` zeroes the last layer.
  template <typename Rng>
  Mlp(const std::vector<int>& sizes, Rng& rng, bool zero_output = false) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      int in = sizes[i];
      int out = sizes[i + 1];
      double limit = std::sqrt(6.0 / static_cast<double>(in + out));
      std::uniform_real_distribution<double> dist(-limit, limit);
      Layer layer{Matrix(out, in), Vector::Zero(out)};
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
          layer.weight(r, c) = Scalar(dist(rng));
        }
      }
      layers_.push_back(std::move(layer));
    }
    if (zero_output) layers_.back().weight.setZero();
  }

  explicit Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {}

  const std::vector<Layer>& layers() const { return layers_; }
  Eigen::Index input_dim() const { return layers_.front().weight.cols(); }
  Eigen::Index output_dim() const { return layers_.back().weight.rows(); }

  Matrix forward(const Matrix& x) const {
    Matrix h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Matrix z = (layers_[i].weight * h).colwise() + layers_[i].bias;
      h = is_hidden(i) ? Matrix(z.array().tanh()) : z;
    }
    return h;
  }

  Matrix forward(const Matrix& x, Cache& cache) const {
    cache.activations.clear();
    cache.activations.push_back(x);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Matrix z = (layers_[i].weight * cache.activations.back()).colwise() + layers_[i].bias;
      cache.activations.push_back(is_hidden(i) ? Matrix(z.array().tanh()) : z);
    }
    return cache.activations.back();
  }

  /// Gradient of sum(upstream .* output) w.r.t. the flattened parameters.
  Vector backward(const Cache& cache, const Matrix& upstream) const {
    Vector grad(parameter_count());
    Matrix delta = upstream;
    Eigen::Index offset = grad.size();
    for (std::size_t idx = layers_.size(); idx-- > 0;) {
      const Layer& layer = layers_[idx];
      if (is_hidden(idx)) {
        const Matrix& out = cache.activations[idx + 1];
        delta = delta.cwiseProduct(Matrix((Scalar(1) - out.array().square())));
      }
      Matrix dW = delta * cache.activations[idx].transpose();
      Vector db = delta.rowwise().sum();
      offset -= layer.bias.size();
      grad.segment(offset, layer.bias.size()) = db;
      offset -= dW.size();
      grad.segment(offset, dW.size()) = Eigen::Map<const Vector>(dW.data(), dW.size());
      if (idx > 0) delta = layer.weight.transpose() * delta;
    }
    return grad;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  /// Layer by layer: weight (column-major), then bias.
  Vector parameters() const {
    Vector p(parameter_count());
    Eigen::Index offset = 0;
    for (const auto& l : layers_) {
      p.segment(offset, l.weight.size()) = Eigen::Map<const Vector>(l.weight.data(), l.weight.size());
      offset += l.weight.size();
      p.segment(offset, l.bias.size()) = l.bias;
      offset += l.bias.size();
    }
    return p;
  }

  void set_parameters(const Vector& p) {
    if (p.size() != parameter_count()) throw std::invalid_argument("Mlp: parameter size mismatch");
    Eigen::Index offset = 0;
    for (auto& l : layers_) {
      l.weight = Eigen::Map<const Matrix>(p.data() + offset, l.weight.rows(), l.weight.cols());
      offset += l.weight.size();
      l.bias = p.segment(offset, l.bias.size());
      offset += l.bias.size();
    }
  }

 private:
  bool is_hidden(std::size_t i) const { return i + 1 < layers_.size(); }

  std::vector<Layer> layers_;
};

}  // namespace corridor
