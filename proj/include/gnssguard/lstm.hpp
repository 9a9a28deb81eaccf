#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "gnssguard/random.hpp"

namespace gnssguard {

/// One recurrent layer. `weights` is (4H) x (input_dim + H) acting on the
/// stacked vector [x_t; h_{t-1}]; its row blocks are the input, forget,
/// candidate and output gates in that order. `bias` has the same blocks.
struct LstmLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weights.cols() - weights.rows() / 4); }
  std::size_t hidden_dim() const noexcept { return static_cast<std::size_t>(weights.rows() / 4); }
};

/// Stacked recurrent layers followed by a linear head on the last hidden
/// state of the top layer.
struct LstmWeights {
  std::vector<LstmLayer> layers;
  Eigen::VectorXd head_weights;
  Eigen::VectorXd head_bias = Eigen::VectorXd::Zero(1);

  static LstmWeights zeros(std::size_t input_dim, std::span<const std::size_t> hidden_dims);

  /// Every parameter uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static LstmWeights uniform_init(std::size_t input_dim, std::span<const std::size_t> hidden_dims, Rng& rng);

  std::size_t input_dim() const noexcept { return layers.empty() ? 0 : layers.front().input_dim(); }
  std::vector<std::size_t> hidden_dims() const;
  std::size_t parameter_count() const noexcept;
  bool all_finite() const noexcept;
};

/// Mutable views over every parameter tensor in a fixed order: per layer
/// (weights, bias), then head weights and head bias.
std::vector<std::span<double>> parameter_views(LstmWeights& w);
std::vector<std::span<const double>> parameter_views(const LstmWeights& w);

/// A mini-batch: one (input_dim x batch) matrix per time step.
using SequenceBatch = std::vector<Eigen::MatrixXd>;

/// Forward pass for a batch with zero initial hidden and cell state.
Eigen::RowVectorXd lstm_forward_batch(const LstmWeights& w, const SequenceBatch& steps);

/// Forward pass for one window laid out as (steps x input_dim).
double lstm_forward(const LstmWeights& w, const Eigen::MatrixXd& window);

/// Mean absolute error of the batch and its gradient by backpropagation
/// through time. `grads` is resized and overwritten.
double mae_loss_and_gradients(const LstmWeights& w, const SequenceBatch& steps,
                              const Eigen::RowVectorXd& targets, LstmWeights& grads);

double mae_loss(const LstmWeights& w, const SequenceBatch& steps, const Eigen::RowVectorXd& targets);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig cfg) : cfg_(cfg) {}

  /// One bias-corrected update of `params` against `grads`. Shapes are
  /// latched on the first call.
  void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads);

  std::size_t steps_taken() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace gnssguard
