#include "stablesel/srdo.hpp"

#include <algorithm>

#include "stablesel/error.hpp"
#include "stablesel/nnet.hpp"

namespace stablesel::srdo {

void SrdoConfig::validate() const {
  if (!(gamma > 1.0)) throw ContractError("SrdoConfig: gamma must exceed 1");
  if (epochs < 1) throw ContractError("SrdoConfig: epochs must be at least 1");
  if (batch_size < 1) throw ContractError("SrdoConfig: batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ContractError("SrdoConfig: learning_rate must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ContractError("SrdoConfig: validation_fraction must be in [0, 1)");
  if (patience < 1) throw ContractError("SrdoConfig: patience must be at least 1");
}

Matrix column_shuffle(const Dataset& data, Rng& rng) {
  if (data.n() < 2) throw ContractError("column_shuffle: need at least two rows");
  const Matrix& x = data.features();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto perm = rng.permutation(data.n());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = x(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]), j);
  }
  return out;
}

WeightVector clip_and_normalize(const Vector& odds, double gamma, Vector* clipped) {
  if (!(gamma > 1.0)) throw ContractError("clip_and_normalize: gamma must exceed 1");
  const Vector c = odds.cwiseMax(1.0 / gamma).cwiseMin(gamma);
  if (clipped != nullptr) *clipped = c;
  return WeightVector::normalized(c);
}

ClassifierFit train_classifier(const Matrix& inputs, const Vector& labels, const SrdoConfig& cfg, Rng& rng) {
  cfg.validate();
  if (inputs.rows() != labels.size()) throw DimensionError("train_classifier: inputs/labels row mismatch");
  std::vector<std::size_t> sizes{static_cast<std::size_t>(inputs.cols())};
  sizes.insert(sizes.end(), cfg.classifier_hidden.begin(), cfg.classifier_hidden.end());
  sizes.push_back(1);
  ClassifierFit out{nnet::Mlp::fan_in_init(sizes, nnet::OutputHead::Sigmoid, rng)};
  nnet::AdamState adam(out.net, cfg.learning_rate);

  std::vector<std::size_t> pos, neg;
  for (Eigen::Index i = 0; i < labels.size(); ++i) (labels[i] > 0.5 ? pos : neg).push_back(static_cast<std::size_t>(i));
  const auto held = [&](std::size_t count) { return static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(count)); };
  if (held(pos.size()) < 1 || held(neg.size()) < 1) {
    const auto trace = nnet::train(out.net, inputs, labels, nnet::Loss::BCE, adam, cfg.epochs, cfg.batch_size, rng);
    out.epochs_run = out.best_epoch = cfg.epochs;
    out.bce = trace.epoch_loss.back();
    return out;
  }

  std::vector<bool> is_val(static_cast<std::size_t>(labels.size()), false);
  for (const auto* cls : {&neg, &pos}) {
    const auto perm = rng.permutation(cls->size());
    for (std::size_t i = 0; i < held(cls->size()); ++i) is_val[(*cls)[perm[i]]] = true;
  }
  const auto n_val = static_cast<Eigen::Index>(std::count(is_val.begin(), is_val.end(), true));
  Matrix tr_x(labels.size() - n_val, inputs.cols()), va_x(n_val, inputs.cols());
  Vector tr_y(labels.size() - n_val), va_y(n_val);
  Eigen::Index t = 0, v = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (is_val[static_cast<std::size_t>(i)]) {
      va_x.row(v) = inputs.row(i);
      va_y[v++] = labels[i];
    } else {
      tr_x.row(t) = inputs.row(i);
      tr_y[t++] = labels[i];
    }
  }
  nnet::Mlp best = out.net;
  out.bce = nnet::loss_and_gradient(out.net, va_x, va_y, nnet::Loss::BCE, nullptr);
  std::size_t stale = 0;
  while (out.epochs_run < cfg.epochs && stale < cfg.patience) {
    nnet::train(out.net, tr_x, tr_y, nnet::Loss::BCE, adam, 1, cfg.batch_size, rng);
    ++out.epochs_run;
    const double bce = nnet::loss_and_gradient(out.net, va_x, va_y, nnet::Loss::BCE, nullptr);
    if (bce < out.bce) {
      out.bce = bce;
      best = out.net;
      out.best_epoch = out.epochs_run;
      stale = 0;
    } else {
      ++stale;
    }
  }
  out.net = std::move(best);
  return out;
}

SrdoFit srdo_fit(const Dataset& data, const SrdoConfig& cfg, Rng& rng) {
  cfg.validate();
  if (data.n() < 10) throw ContractError("srdo_fit: need at least 10 samples");
  const auto n = static_cast<Eigen::Index>(data.n());

  Rng shuffle_rng(cfg.shuffle_seed);
  Matrix inputs(2 * n, data.features().cols());
  inputs.topRows(n) = data.features();
  inputs.bottomRows(n) = column_shuffle(data, shuffle_rng);
  Vector labels(2 * n);
  labels.head(n).setZero();
  labels.tail(n).setOnes();

  const auto cls = train_classifier(inputs, labels, cfg, rng);
  const Vector prob =
      cls.net.forward_batch(data.features()).col(0).cwiseMax(kProbabilityClamp).cwiseMin(1.0 - kProbabilityClamp);
  const Vector odds = prob.array() / (1.0 - prob.array());
  Vector clipped;
  WeightVector w = clip_and_normalize(odds, cfg.gamma, &clipped);
  return SrdoFit{std::move(w), odds, std::move(clipped), cls.bce, cls.epochs_run, cls.best_epoch};
}

}  // namespace stablesel::srdo
