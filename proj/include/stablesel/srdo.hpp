#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "stablesel/core.hpp"
#include "stablesel/nnet.hpp"
#include "stablesel/rng.hpp"

namespace stablesel::srdo {

struct SrdoConfig {
  double gamma = 10.0;  // weights are clipped to [1/gamma, gamma]
  std::vector<std::size_t> classifier_hidden = {30, 10};
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  std::uint64_t shuffle_seed = 0;
  // Share of each class held out for early stopping; 0 trains for exactly
  // `epochs` epochs on everything.
  double validation_fraction = 0.0;
  std::size_t patience = 10;  // epochs without held-out improvement before stopping
  void validate() const;
};

// Permutes every column independently; each column keeps its multiset of
// values, while the joint becomes the product of the empirical marginals.
Matrix column_shuffle(const Dataset& data, Rng& rng);

struct SrdoFit {
  WeightVector weights;  // clipped, then mean-normalized
  Vector odds;           // p/(1-p) before clipping
  Vector clipped;        // odds clipped to [1/gamma, gamma], before normalization
  double final_bce = 0.0;  // held-out BCE at the kept epoch (training BCE without a split)
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 0: the initial parameters were kept
};

struct ClassifierFit {
  nnet::Mlp net;
  double bce = 0.0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 0: the initial parameters were kept
};

// The SRDO classifier schedule on arbitrary 0/1 labels. With a validation
// split, validation_fraction of each class is held out and the parameters with
// the lowest held-out BCE are returned.
ClassifierFit train_classifier(const Matrix& inputs, const Vector& labels, const SrdoConfig& cfg, Rng& rng);

// Clip to [1/gamma, gamma], then renormalize to mean 1.
WeightVector clip_and_normalize(const Vector& odds, double gamma, Vector* clipped = nullptr);

// Density ratio prod_i P(x_i) / P(x) by class-probability estimation: rows of
// the data (label 0) against a column-shuffled copy (label 1), separated by a
// ReLU MLP trained with binary cross-entropy. The shuffle uses
// cfg.shuffle_seed; initialization and batching use rng.
SrdoFit srdo_fit(const Dataset& data, const SrdoConfig& cfg, Rng& rng);

inline constexpr double kProbabilityClamp = 1e-6;

}  // namespace stablesel::srdo
