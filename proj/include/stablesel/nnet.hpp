#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stablesel/core.hpp"
#include "stablesel/rng.hpp"

namespace stablesel::nnet {

enum class OutputHead { Linear, Sigmoid };
enum class Loss { MSE, BCE };

// Dense feed-forward network: affine + ReLU on every hidden layer, affine +
// head on the last one. Layer l maps sizes[l] -> sizes[l+1] with weights of
// shape (sizes[l+1] x sizes[l]).
class Mlp {
 public:
  // All parameters zero.
  Mlp(std::vector<std::size_t> layer_sizes, OutputHead head);

  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static Mlp fan_in_init(std::vector<std::size_t> layer_sizes, OutputHead head, Rng& rng);
  // U(lo, hi) for weights and biases.
  static Mlp uniform_init(std::vector<std::size_t> layer_sizes, OutputHead head, double lo, double hi,
                          Rng& rng);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  OutputHead head() const { return head_; }
  std::size_t num_layers() const { return weights_.size(); }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }

  Matrix& weight(std::size_t layer) { return weights_[layer]; }
  const Matrix& weight(std::size_t layer) const { return weights_[layer]; }
  Vector& bias(std::size_t layer) { return biases_[layer]; }
  const Vector& bias(std::size_t layer) const { return biases_[layer]; }

  // Flat view over all parameters, layer by layer, weights (column-major)
  // before biases.
  std::size_t num_parameters() const;
  double& parameter(std::size_t k);
  double parameter(std::size_t k) const;

  Vector forward(const Vector& x) const;
  // Rows are samples.
  Matrix forward_batch(const Matrix& inputs) const;

  std::string to_json() const;

 private:
  friend struct BackpropAccess;
  std::vector<std::size_t> sizes_;
  OutputHead head_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

// Mean loss over the batch and, when `grad` is non-null, its gradient.
// MSE: mean (yhat - t)^2. BCE needs the sigmoid head and is evaluated from
// logits: mean softplus(z) - t z.
double loss_and_gradient(const Mlp& net, const Matrix& inputs, const Vector& targets, Loss loss,
                         Gradients* grad);

class AdamState {
 public:
  explicit AdamState(const Mlp& net, double learning_rate = 1e-3, double beta1 = 0.9,
                     double beta2 = 0.999, double eps = 1e-8);
  void step(Mlp& net, const Gradients& grad);
  std::size_t steps() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  Gradients m_, v_;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // sample-weighted mean loss per epoch
};

// Mini-batch Adam. Each epoch visits a fresh permutation drawn from rng.
// Throws DivergenceError (carrying the optimizer step) on a non-finite loss.
TrainResult train(Mlp& net, const Matrix& inputs, const Vector& targets, Loss loss, AdamState& adam,
                  std::size_t epochs, std::size_t batch_size, Rng& rng);

// Backprop vs central differences (step h) over a random subset of up to
// `probes` parameters. Relative error |a - n| / max(|a|, |n|, 1e-6).
double grad_check(const Mlp& net, const Matrix& inputs, const Vector& targets, Loss loss, Rng& rng,
                  std::size_t probes = 50, double h = 1e-5);

}  // namespace stablesel::nnet
