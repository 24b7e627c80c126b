#include <gtest/gtest.h>

#include <cmath>

#include "stablesel/dwr.hpp"
#include "stablesel/error.hpp"
#include "stablesel/synthgen.hpp"

using namespace stablesel;
using namespace stablesel::dwr;

namespace {

double softplus(double x) { return std::log1p(std::exp(x)); }

Vector raw_for_weights(const Vector& w) { return w.unaryExpr([](double v) { return std::log(std::expm1(v)); }); }

}  // namespace

TEST(DwrLoss, UncorrelatedColumnsGiveZero) {
  Matrix x(4, 2);
  x << 1, 1, 1, -1, -1, 1, -1, -1;
  DwrConfig cfg;
  cfg.lambda1 = cfg.lambda2 = 0;
  EXPECT_NEAR(dwr_loss(Dataset(x, Vector::Zero(4)), raw_for_weights(Vector::Constant(4, 0.25)), cfg), 0.0, 1e-14);
}

TEST(DwrLoss, TwoPointToy) {
  Matrix x(2, 2);
  x << 1, 1, -1, -1;
  DwrConfig cfg;
  cfg.lambda1 = cfg.lambda2 = 0;
  EXPECT_NEAR(dwr_loss(Dataset(x, Vector::Zero(2)), raw_for_weights(Vector::Constant(2, 0.5)), cfg), 2.0, 1e-12);
}

TEST(DwrLoss, ZeroRawUsesLogTwo) {
  // frozen from a direct evaluation at w = ln 2 per entry
  Matrix x(3, 2);
  x << 1, 2, 0, -1, 3, 1;
  DwrConfig cfg;
  cfg.lambda1 = 0.1;
  cfg.lambda2 = 0.2;
  EXPECT_NEAR(dwr_loss(Dataset(x, Vector::Zero(3)), Vector::Zero(3), cfg), 1.6146677557512115, 1e-12);
}

TEST(DwrLoss, GradientMatchesFiniteDifferences) {
  Rng rng(1);
  for (int inst = 0; inst < 10; ++inst) {
    Matrix x(20, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    x.col(1) += 0.7 * x.col(0);
    Vector raw(20);
    for (auto& r : raw) r = rng.normal(-2.0, 1.0);
    DwrConfig cfg;
    cfg.lambda1 = 0.1;
    cfg.lambda2 = 0.05;
    Vector g;
    dwr_loss_and_gradient(x, raw, cfg, &g);
    for (int probe = 0; probe < 10; ++probe) {
      const auto k = static_cast<Eigen::Index>(rng.uniform_int(20));
      const double h = 1e-6;
      Vector p = raw, m = raw;
      p[k] += h;
      m[k] -= h;
      const double fd = (dwr_loss_and_gradient(x, p, cfg, nullptr) - dwr_loss_and_gradient(x, m, cfg, nullptr)) / (2 * h);
      const double rel = std::abs(fd - g[k]) / std::max({std::abs(fd), std::abs(g[k]), 1e-6});
      EXPECT_LT(rel, 1e-5) << "instance " << inst << " coord " << k;
    }
  }
}

TEST(DwrFit, IndependentColumnsStayNearUniform) {
  // the weights chase sample-covariance noise of order 1/sqrt(n), so the
  // deviation from 1 shrinks with n: about 0.12 at 2000, 0.04 at 10^4
  synthgen::Generator gen{synthgen::GeneratorSpec{}};
  Rng rng(3);
  const Matrix all = gen.draw_covariates(10000, rng);
  const Dataset v(all.rightCols(5), Vector::Zero(10000));
  const auto fit = dwr_fit(v, DwrConfig{});
  const Vector dev = (fit.weights.values().array() - 1.0).abs();
  EXPECT_LT(dev.mean(), 0.05);
  EXPECT_LE(fit.final_loss, fit.initial_loss);
}

TEST(DwrFit, PerfectlyCorrelatedFeaturesStillImprove) {
  Rng rng(4);
  Matrix x(200, 2);
  for (Eigen::Index i = 0; i < 200; ++i) x(i, 0) = x(i, 1) = rng.normal();
  DwrConfig cfg;
  cfg.max_iters = 500;
  const auto fit = dwr_fit(Dataset(x, Vector::Zero(200)), cfg);
  EXPECT_LT(fit.final_loss, fit.initial_loss);
  EXPECT_GT(fit.max_abs_cov, 0.0);
}

TEST(DwrFit, DecorrelatesBiasedEnvironment) {
  synthgen::Generator gen{synthgen::GeneratorSpec{}};
  Rng rng(0);
  const auto env = synthgen::sample_environment(gen, {2.5, 2000, 0}, rng);
  const double before = max_abs_offdiag_cov(env.data.features(), Vector::Ones(2000));
  const auto fit = dwr_fit(env.data, DwrConfig{});
  EXPECT_GT(before, 0.05);
  EXPECT_LT(fit.max_abs_cov, 0.05);
  EXPECT_NEAR(fit.weights.values().mean(), 1.0, 1e-9);
  EXPECT_GT(fit.weights.values().minCoeff(), 0.0);
  EXPECT_NEAR(max_abs_offdiag_cov(env.data.features(), fit.weights.values()), fit.max_abs_cov, 1e-12);
}

TEST(DwrFit, DeterministicAndValidated) {
  Rng rng(5);
  Matrix x(50, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  DwrConfig cfg;
  cfg.max_iters = 200;
  const Dataset d(x, Vector::Zero(50));
  EXPECT_EQ(dwr_fit(d, cfg).weights.values(), dwr_fit(d, cfg).weights.values());
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.validate(), ContractError);
  EXPECT_NEAR(softplus(initial_raw_weight(50)), 1.0 / 50, 1e-15);
}
