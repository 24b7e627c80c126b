#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "stablesel/error.hpp"
#include "stablesel/srdo.hpp"
#include "stablesel/synthgen.hpp"

using namespace stablesel;
using namespace stablesel::srdo;

namespace {

Dataset noise_block(std::size_t n, std::uint64_t seed) {
  synthgen::Generator gen{synthgen::GeneratorSpec{}};
  Rng rng(seed);
  const Matrix all = gen.draw_covariates(n, rng);
  return Dataset(all.rightCols(5), Vector::Zero(static_cast<Eigen::Index>(n)));
}

}  // namespace

TEST(ColumnShuffle, SingleColumnIsPermutation) {
  Matrix x(6, 1);
  x << 3, 1, 4, 1, 5, 9;
  Rng rng(1);
  Matrix s = column_shuffle(Dataset(x, Vector::Zero(6)), rng);
  std::vector<double> a(x.data(), x.data() + 6), b(s.data(), s.data() + 6);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(ColumnShuffle, TwoByTwoFrequencies) {
  Matrix x(2, 2);
  x << 0, 0, 1, 1;
  const Dataset d(x, Vector::Zero(2));
  Rng rng(2);
  std::map<std::pair<double, double>, int> counts;  // first row of the shuffled matrix
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const Matrix s = column_shuffle(d, rng);
    counts[{s(0, 0), s(0, 1)}]++;
  }
  ASSERT_EQ(counts.size(), 4u);
  const double sigma = std::sqrt(trials * 0.25 * 0.75);
  for (const auto& [k, c] : counts) EXPECT_NEAR(c, trials * 0.25, 3 * sigma);
}

TEST(ColumnShuffle, MomentsPreserved) {
  const auto d = noise_block(500, 3);
  Rng rng(4);
  const Matrix s = column_shuffle(d, rng);
  for (Eigen::Index j = 0; j < 5; ++j) {
    std::vector<double> a(d.features().col(j).data(), d.features().col(j).data() + 500);
    std::vector<double> b(s.col(j).data(), s.col(j).data() + 500);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
}

TEST(ClipAndNormalize, RangeAndDegenerateGamma) {
  Vector odds(5);
  odds << 1e-4, 0.5, 1, 3, 1e4;
  Vector clipped;
  const auto w = clip_and_normalize(odds, 10, &clipped);
  EXPECT_DOUBLE_EQ(clipped.minCoeff(), 0.1);
  EXPECT_DOUBLE_EQ(clipped.maxCoeff(), 10.0);
  EXPECT_NEAR(w.values().mean(), 1.0, 1e-12);
  const auto flat = clip_and_normalize(odds, 1 + 1e-9);
  EXPECT_LT((flat.values().array() - 1).abs().maxCoeff(), 1e-8);
  EXPECT_THROW(clip_and_normalize(odds, 1.0), ContractError);
}

TEST(SrdoFit, IndependentColumnsGiveNearUniformWeights) {
  const auto d = noise_block(5000, 5);
  Rng rng(6);
  const auto fit = srdo_fit(d, SrdoConfig{}, rng);
  EXPECT_LT((fit.weights.values().array() - 1.0).abs().mean(), 0.15);
  EXPECT_GE(fit.clipped.minCoeff(), 0.1);
  EXPECT_LE(fit.clipped.maxCoeff(), 10.0);
}

TEST(SrdoFit, RandomLabelsConvergeToUniform) {
  // labels carry no signal; held-out BCE stops training before the net
  // memorizes noise. Single runs scatter around 0.07, so take a median.
  std::vector<double> sds;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto d = noise_block(5000, 7 + s);
    Rng srng(8 + s);
    Matrix inputs(10000, 5);
    inputs << d.features(), column_shuffle(d, srng);
    Vector labels(10000);
    Rng rng(9 + s);
    const auto perm = rng.permutation(10000);
    for (std::size_t i = 0; i < perm.size(); ++i) labels[static_cast<Eigen::Index>(i)] = perm[i] < 5000 ? 1.0 : 0.0;
    SrdoConfig cfg;
    cfg.validation_fraction = 0.2;
    const auto cls = train_classifier(inputs, labels, cfg, rng);
    EXPECT_LT(cls.best_epoch, cfg.epochs);
    const Vector p = cls.net.forward_batch(d.features()).col(0);
    const Vector odds = p.array() / (1 - p.array());
    const auto w = clip_and_normalize(odds, cfg.gamma);
    sds.push_back(std::sqrt((w.values().array() - 1).square().mean()));
  }
  std::nth_element(sds.begin(), sds.begin() + 2, sds.end());
  EXPECT_LT(sds[2], 0.1);
}

TEST(SrdoFit, ValidationSplitStopsEarly) {
  const auto d = noise_block(2000, 11);
  SrdoConfig cfg;
  cfg.validation_fraction = 0.2;
  cfg.patience = 3;
  Rng rng(2);
  const auto fit = srdo_fit(d, cfg, rng);
  EXPECT_EQ(fit.best_epoch + cfg.patience, fit.epochs_run);
  EXPECT_LT(fit.epochs_run, cfg.epochs);
  cfg.validation_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), ContractError);
}

TEST(SrdoFit, DeterministicAndPreconditions) {
  const auto d = noise_block(300, 10);
  SrdoConfig cfg;
  cfg.epochs = 3;
  Rng a(1), b(1);
  EXPECT_EQ(srdo_fit(d, cfg, a).weights.values(), srdo_fit(d, cfg, b).weights.values());
  Rng c(1);
  EXPECT_THROW(srdo_fit(noise_block(5, 1), cfg, c), ContractError);
  cfg.gamma = 0.5;
  EXPECT_THROW(cfg.validate(), ContractError);
}

TEST(SrdoFit, WeightsReduceDependenceOnBiasedData) {
  synthgen::Generator gen{synthgen::GeneratorSpec{}};
  Rng drng(0);
  const auto env = synthgen::sample_environment(gen, {2.5, 2000, 0}, drng);
  Rng rng(1);
  const auto fit = srdo_fit(env.data, SrdoConfig{}, rng);
  const double before = max_abs_offdiag_cov(env.data.features(), Vector::Ones(2000));
  EXPECT_LT(max_abs_offdiag_cov(env.data.features(), fit.weights.values()), before);
}
