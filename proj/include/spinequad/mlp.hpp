#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spinequad/errors.hpp"

// Small dense multilayer perceptron: tanh hidden layers, linear output,
// hand-rolled reverse-mode gradients. Sized for policies with a few hundred
// to a few hundred thousand parameters; everything is plain Eigen, no
// autodiff framework.
namespace spinequad {

class Mlp {
 public:
  Mlp() = default;

  Mlp(int input, std::vector<int> hidden, int output) {
    if (input < 1 || output < 1)
      throw ArgumentError("mlp: input and output sizes must be >= 1");
    for (int h : hidden)
      if (h < 1) throw ArgumentError("mlp: hidden sizes must be >= 1");
    sizes_.push_back(input);
    for (int h : hidden) sizes_.push_back(h);
    sizes_.push_back(output);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      weights_.emplace_back(Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]));
      biases_.emplace_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
    }
  }

  // Scaled-Gaussian init (std 1/sqrt(fan_in)); the final layer is shrunk by
  // `output_scale` so freshly initialized policies act near their defaults.
  void init_random(std::uint64_t seed, double output_scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      const double scale = 1.0 / std::sqrt(double(weights_[l].cols()));
      const double out = (l + 1 == weights_.size()) ? output_scale : 1.0;
      for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
        for (Eigen::Index j = 0; j < weights_[l].cols(); ++j)
          weights_[l](i, j) = normal(rng) * scale * out;
      biases_[l].setZero();
    }
  }

  int input_size() const { return sizes_.empty() ? 0 : sizes_.front(); }
  int output_size() const { return sizes_.empty() ? 0 : sizes_.back(); }
  int layer_count() const { return int(weights_.size()); }
  const std::vector<int>& sizes() const { return sizes_; }

  int param_count() const {
    int n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
      n += int(weights_[l].size() + biases_[l].size());
    return n;
  }

  // Parameters as one flat vector (row-major weights then bias, per layer).
  // Gradients use the same layout, so optimizers can treat the network as a
  // single parameter vector.
  Eigen::VectorXd flatten() const {
    Eigen::VectorXd theta(param_count());
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
        for (Eigen::Index j = 0; j < weights_[l].cols(); ++j)
          theta[at++] = weights_[l](i, j);
      for (Eigen::Index i = 0; i < biases_[l].size(); ++i)
        theta[at++] = biases_[l][i];
    }
    return theta;
  }

  void unflatten(const Eigen::VectorXd& theta) {
    if (theta.size() != param_count())
      throw ArgumentError("mlp: parameter vector has wrong length");
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
        for (Eigen::Index j = 0; j < weights_[l].cols(); ++j)
          weights_[l](i, j) = theta[at++];
      for (Eigen::Index i = 0; i < biases_[l].size(); ++i)
        biases_[l][i] = theta[at++];
    }
  }

  bool finite() const {
    for (std::size_t l = 0; l < weights_.size(); ++l)
      if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
    return true;
  }

  // Forward pass; `cache` (activations per layer) enables backward().
  struct Cache {
    std::vector<Eigen::VectorXd> act;  // act[0] = input, act[L] = output
  };

  Eigen::VectorXd forward(const Eigen::VectorXd& x, Cache* cache = nullptr) const {
    if (x.size() != input_size())
      throw ArgumentError("mlp: input has length " + std::to_string(x.size()) +
                          ", expected " + std::to_string(input_size()));
    if (cache) {
      cache->act.clear();
      cache->act.push_back(x);
    }
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      a = weights_[l] * a + biases_[l];
      if (l + 1 < weights_.size()) a = a.array().tanh().matrix();
      if (cache) cache->act.push_back(a);
    }
    return a;
  }

  // Reverse pass: given dL/d(output) and the forward cache, accumulates
  // parameter gradients into `grad` (an Mlp of identical shape used as an
  // accumulator) and returns dL/d(input).
  Eigen::VectorXd backward(const Cache& cache, Eigen::VectorXd dy,
                           Mlp& grad) const {
    if (cache.act.size() != weights_.size() + 1)
      throw ArgumentError("mlp: cache does not match network depth");
    if (dy.size() != output_size())
      throw ArgumentError("mlp: output gradient has wrong length");
    for (int l = layer_count() - 1; l >= 0; --l) {
      // dL/dz for this layer: the output layer is linear, hidden layers tanh.
      if (l + 1 < layer_count()) {
        const Eigen::VectorXd& a = cache.act[std::size_t(l) + 1];
        dy = (dy.array() * (1.0 - a.array().square())).matrix();
      }
      grad.weights_[std::size_t(l)].noalias() +=
          dy * cache.act[std::size_t(l)].transpose();
      grad.biases_[std::size_t(l)] += dy;
      if (l > 0) dy = weights_[std::size_t(l)].transpose() * dy;
    }
    return weights_.front().transpose() * dy;
  }

  static Mlp zeros_like(const Mlp& other) {
    Mlp z;
    z.sizes_ = other.sizes_;
    for (std::size_t l = 0; l < other.weights_.size(); ++l) {
      z.weights_.emplace_back(
          Eigen::MatrixXd::Zero(other.weights_[l].rows(), other.weights_[l].cols()));
      z.biases_.emplace_back(Eigen::VectorXd::Zero(other.biases_[l].size()));
    }
    return z;
  }

  void set_zero() {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      weights_[l].setZero();
      biases_[l].setZero();
    }
  }

 private:
  std::vector<int> sizes_;  // [input, hidden..., output]
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

}  // namespace spinequad
