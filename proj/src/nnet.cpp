#include "stablesel/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "stablesel/error.hpp"

namespace stablesel::nnet {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Gradients zeros_like(const Mlp& net) {
  Gradients g;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    g.weights.push_back(Matrix::Zero(net.weight(l).rows(), net.weight(l).cols()));
    g.biases.push_back(Vector::Zero(net.bias(l).size()));
  }
  return g;
}

// Pre-activations of every layer for a batch; the last entry is the logit /
// linear output before the head.
std::vector<Matrix> forward_trace(const Mlp& net, const Matrix& inputs, std::vector<Matrix>& acts) {
  std::vector<Matrix> pre;
  acts.clear();
  acts.push_back(inputs);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Matrix z = acts.back() * net.weight(l).transpose();
    z.rowwise() += net.bias(l).transpose();
    pre.push_back(z);
    if (l + 1 < net.num_layers()) acts.push_back(z.cwiseMax(0.0));
  }
  return pre;
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> layer_sizes, OutputHead head) : sizes_(std::move(layer_sizes)), head_(head) {
  if (sizes_.size() < 2) throw ContractError("Mlp: need input and output sizes");
  for (auto s : sizes_) {
    if (s == 0) throw ContractError("Mlp: layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.push_back(Matrix::Zero(static_cast<Eigen::Index>(sizes_[l + 1]), static_cast<Eigen::Index>(sizes_[l])));
    biases_.push_back(Vector::Zero(static_cast<Eigen::Index>(sizes_[l + 1])));
  }
}

Mlp Mlp::fan_in_init(std::vector<std::size_t> layer_sizes, OutputHead head, Rng& rng) {
  Mlp net(std::move(layer_sizes), head);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    for (auto& v : net.weights_[l].reshaped()) v = rng.uniform(-bound, bound);
    for (auto& v : net.biases_[l]) v = rng.uniform(-bound, bound);
  }
  return net;
}

Mlp Mlp::uniform_init(std::vector<std::size_t> layer_sizes, OutputHead head, double lo, double hi, Rng& rng) {
  Mlp net(std::move(layer_sizes), head);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    for (auto& v : net.weights_[l].reshaped()) v = rng.uniform(lo, hi);
    for (auto& v : net.biases_[l]) v = rng.uniform(lo, hi);
  }
  return net;
}

std::size_t Mlp::num_parameters() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    total += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return total;
}

double& Mlp::parameter(std::size_t k) {
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const auto nw = static_cast<std::size_t>(weights_[l].size());
    if (k < nw) return weights_[l].data()[k];
    k -= nw;
    const auto nb = static_cast<std::size_t>(biases_[l].size());
    if (k < nb) return biases_[l].data()[k];
    k -= nb;
  }
  throw DimensionError("Mlp::parameter: index out of range");
}

double Mlp::parameter(std::size_t k) const { return const_cast<Mlp*>(this)->parameter(k); }

Matrix Mlp::forward_batch(const Matrix& inputs) const {
  if (static_cast<std::size_t>(inputs.cols()) != input_size()) {
    throw DimensionError("Mlp::forward: input width " + std::to_string(inputs.cols()) + " != " +
                         std::to_string(input_size()));
  }
  Matrix a = inputs;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix z = a * weights_[l].transpose();
    z.rowwise() += biases_[l].transpose();
    a = (l + 1 < num_layers()) ? Matrix(z.cwiseMax(0.0)) : z;
  }
  if (head_ == OutputHead::Sigmoid) a = a.unaryExpr([](double z) { return sigmoid(z); });
  return a;
}

Vector Mlp::forward(const Vector& x) const { return forward_batch(x.transpose()).row(0).transpose(); }

std::string Mlp::to_json() const {
  nlohmann::json j;
  j["layer_sizes"] = sizes_;
  j["head"] = head_ == OutputHead::Linear ? "linear" : "sigmoid";
  j["activation"] = "relu";
  auto& layers = j["layers"];
  layers = nlohmann::json::array();
  for (std::size_t l = 0; l < num_layers(); ++l) {
    nlohmann::json layer;
    std::vector<std::vector<double>> w(static_cast<std::size_t>(weights_[l].rows()));
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) w[static_cast<std::size_t>(r)].push_back(weights_[l](r, c));
    }
    layer["weight"] = w;
    layer["bias"] = std::vector<double>(biases_[l].begin(), biases_[l].end());
    layers.push_back(layer);
  }
  return j.dump();
}

double loss_and_gradient(const Mlp& net, const Matrix& inputs, const Vector& targets, Loss loss,
                         Gradients* grad) {
  if (net.output_size() != 1) throw ContractError("loss_and_gradient: single-output networks only");
  if (inputs.rows() != targets.size()) throw DimensionError("loss_and_gradient: inputs/targets misaligned");
  if (static_cast<std::size_t>(inputs.cols()) != net.input_size()) {
    throw DimensionError("loss_and_gradient: input width mismatch");
  }
  if (loss == Loss::BCE && net.head() != OutputHead::Sigmoid) {
    throw ContractError("loss_and_gradient: BCE requires the sigmoid head");
  }
  const auto batch = static_cast<double>(inputs.rows());
  std::vector<Matrix> acts;
  const std::vector<Matrix> pre = forward_trace(net, inputs, acts);
  const Vector out = pre.back().col(0);

  double value = 0.0;
  Vector delta(out.size());
  if (loss == Loss::MSE) {
    Vector pred = out;
    if (net.head() == OutputHead::Sigmoid) pred = out.unaryExpr([](double z) { return sigmoid(z); });
    const Vector r = pred - targets;
    value = r.squaredNorm() / batch;
    delta = 2.0 * r / batch;
    if (net.head() == OutputHead::Sigmoid) delta = delta.cwiseProduct(pred.cwiseProduct((1.0 - pred.array()).matrix()));
  } else {
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      value += softplus(out[i]) - targets[i] * out[i];
      delta[i] = (sigmoid(out[i]) - targets[i]) / batch;
    }
    value /= batch;
  }
  if (grad == nullptr) return value;

  *grad = zeros_like(net);
  Matrix d = delta;  // batch x out
  for (std::size_t l = net.num_layers(); l-- > 0;) {
    grad->weights[l] = d.transpose() * acts[l];
    grad->biases[l] = d.colwise().sum().transpose();
    if (l > 0) {
      Matrix back = d * net.weight(l);
      d = back.array() * (pre[l - 1].array() > 0.0).cast<double>();
    }
  }
  return value;
}

AdamState::AdamState(const Mlp& net, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), m_(zeros_like(net)), v_(zeros_like(net)) {
  if (!(learning_rate > 0.0)) throw ContractError("AdamState: learning rate must be positive");
}

void AdamState::step(Mlp& net, const Gradients& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    update(net.weight(l), m_.weights[l], v_.weights[l], grad.weights[l]);
    update(net.bias(l), m_.biases[l], v_.biases[l], grad.biases[l]);
  }
}

TrainResult train(Mlp& net, const Matrix& inputs, const Vector& targets, Loss loss, AdamState& adam,
                  std::size_t epochs, std::size_t batch_size, Rng& rng) {
  if (inputs.rows() != targets.size()) throw DimensionError("train: inputs/targets misaligned");
  if (batch_size == 0) throw ContractError("train: batch size must be positive");
  if (loss == Loss::BCE) {
    for (double t : targets) {
      if (t != 0.0 && t != 1.0) throw ContractError("train: BCE targets must be 0 or 1");
    }
  }
  TrainResult result;
  const auto n = static_cast<std::size_t>(inputs.rows());
  Gradients grad;
  Matrix xb;
  Vector yb;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const auto order = rng.permutation(n);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t len = std::min(batch_size, n - start);
      xb.resize(static_cast<Eigen::Index>(len), inputs.cols());
      yb.resize(static_cast<Eigen::Index>(len));
      for (std::size_t k = 0; k < len; ++k) {
        xb.row(static_cast<Eigen::Index>(k)) = inputs.row(static_cast<Eigen::Index>(order[start + k]));
        yb[static_cast<Eigen::Index>(k)] = targets[static_cast<Eigen::Index>(order[start + k])];
      }
      const double value = loss_and_gradient(net, xb, yb, loss, &grad);
      if (!std::isfinite(value)) {
        throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch), adam.steps());
      }
      adam.step(net, grad);
      total += value * static_cast<double>(len);
    }
    result.epoch_loss.push_back(total / static_cast<double>(n));
  }
  return result;
}

double grad_check(const Mlp& net, const Matrix& inputs, const Vector& targets, Loss loss, Rng& rng,
                  std::size_t probes, double h) {
  Gradients grad;
  loss_and_gradient(net, inputs, targets, loss, &grad);
  Mlp flat_grad = net;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    flat_grad.weight(l) = grad.weights[l];
    flat_grad.bias(l) = grad.biases[l];
  }
  const std::size_t total = net.num_parameters();
  auto order = rng.permutation(total);
  order.resize(std::min(probes, total));

  Mlp probe = net;
  double worst = 0.0;
  for (std::size_t k : order) {
    const double saved = probe.parameter(k);
    probe.parameter(k) = saved + h;
    const double up = loss_and_gradient(probe, inputs, targets, loss, nullptr);
    probe.parameter(k) = saved - h;
    const double down = loss_and_gradient(probe, inputs, targets, loss, nullptr);
    probe.parameter(k) = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = flat_grad.parameter(k);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

}  // namespace stablesel::nnet
