#include <gtest/gtest.h>

#include <cmath>

#include "stablesel/error.hpp"
#include "stablesel/regress.hpp"
#include "stablesel/synthgen.hpp"

using namespace stablesel;
using namespace stablesel::synthgen;

TEST(Covariates, MovingAverageCorrelation) {
  GeneratorSpec spec;
  spec.clip = false;
  Generator gen(spec);
  Rng rng(1);
  const Matrix x = gen.draw_covariates(1000000, rng);
  // 0.8*0.2 / (0.8^2 + 0.2^2)
  EXPECT_NEAR(pearson(x.col(0), x.col(1)), 0.16 / 0.68, 0.01);
  EXPECT_NEAR(pearson(x.col(0), x.col(2)), 0.0, 0.01);
  for (int i = 5; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) EXPECT_LT(std::abs(pearson(x.col(i), x.col(j))), 0.01);
}

TEST(Covariates, ClippedToBounds) {
  Generator gen{GeneratorSpec{}};
  Rng rng(2);
  const Matrix x = gen.draw_covariates(50000, rng);
  EXPECT_LE(x.maxCoeff(), kClipBound);
  EXPECT_GE(x.minCoeff(), -kClipBound);
  EXPECT_EQ(x.cols(), 10);
}

TEST(Outcome, PolyExamples) {
  GeneratorSpec spec;
  spec.add_noise = false;
  Generator gen(spec);
  Rng rng(0);
  Vector s = Vector::Zero(5);
  EXPECT_EQ(gen.outcome(s, rng), 0.0);
  s << 1, 1, 1, 0, 0;
  EXPECT_NEAR(gen.outcome(s, rng), 11.0 / 12.0, 1e-15);
  EXPECT_EQ(gen.outcome(s, rng), gen.outcome(s, rng));
}

TEST(Outcome, MlpWithZeroTheta) {
  GeneratorSpec spec;
  spec.outcome_kind = OutcomeKind::MLP;
  spec.add_noise = false;
  Generator gen(spec, nnet::Mlp({3, 3, 3, 1}, nnet::OutputHead::Linear));
  Vector s(5);
  s << 1, 1, 1, 0, 0;
  EXPECT_NEAR(gen.noiseless_outcome(s), 2.0 / 3.0, 1e-15);
}

TEST(Outcome, MlpThetaWithinUnitBox) {
  GeneratorSpec spec;
  spec.outcome_kind = OutcomeKind::MLP;
  spec.mlp_theta_seed = 9;
  Generator gen(spec);
  const auto& net = *gen.theta_net();
  for (std::size_t k = 0; k < net.num_parameters(); ++k) {
    EXPECT_GE(net.parameter(k), -1.0);
    EXPECT_LE(net.parameter(k), 1.0);
  }
  Generator again(spec);
  EXPECT_EQ(again.theta_net()->to_json(), net.to_json());
}

TEST(Outcome, NoiseHasConfiguredScale) {
  Generator gen{GeneratorSpec{}};
  Rng rng(4);
  const Vector s = Vector::Zero(5);
  double sum2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum2 += std::pow(gen.outcome(s, rng), 2);
  EXPECT_NEAR(std::sqrt(sum2 / n), 0.3, 0.005);
}

TEST(Acceptance, ProbabilityExamples) {
  EXPECT_DOUBLE_EQ(acceptance_probability(0.7, 0.7, 0.7, 2.5), 1.0);
  EXPECT_NEAR(acceptance_probability(0.0, 0.1, -0.1, 2.0), 0.25, 1e-15);
  // r < 0 flips the target sign
  EXPECT_DOUBLE_EQ(acceptance_probability(0.5, -0.5, -0.5, -3.0), 1.0);
}

TEST(Environment, SpuriousCorrelationSign) {
  Generator gen{GeneratorSpec{}};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng pos(seed), neg(seed + 100);
    const auto p = sample_environment(gen, {2.5, 10000, 0}, pos);
    const auto m = sample_environment(gen, {-2.5, 10000, 0}, neg);
    EXPECT_EQ(p.data.n(), 10000u);
    EXPECT_GT(p.acceptance_rate, 0.0);
    const double cp = pearson(p.data.features().col(8), p.data.outcome());
    EXPECT_GT(cp, 0.2);
    EXPECT_LT(pearson(m.data.features().col(8), m.data.outcome()), 0.0);
  }
}

TEST(Environment, ConditionalOutcomeIsInvariant) {
  // Regressing Y on S only: coefficients agree across bias rates.
  Generator gen{GeneratorSpec{}};
  std::vector<std::size_t> s_cols{0, 1, 2, 3, 4};
  Rng r1(1), r2(2);
  const auto a = sample_environment(gen, {2.5, 10000, 0}, r1).data.select_columns(s_cols);
  const auto b = sample_environment(gen, {-1.5, 10000, 0}, r2).data.select_columns(s_cols);
  const auto ca = regress::ols(a), cb = regress::ols(b);
  auto se = [](const Dataset& d, const regress::Coefficients& c) {
    const Vector res = d.outcome() - c.predict(d.features());
    const double s2 = res.squaredNorm() / static_cast<double>(d.n() - d.d() - 1);
    Matrix xa(d.n(), d.d() + 1);
    xa << d.features(), Vector::Ones(static_cast<Eigen::Index>(d.n()));
    return Vector((s2 * (xa.transpose() * xa).inverse()).diagonal().head(d.d()).cwiseSqrt());
  };
  const Vector sa = se(a, ca), sb = se(b, cb);
  for (Eigen::Index j = 0; j < 5; ++j) {
    const double tol = 3 * std::sqrt(sa[j] * sa[j] + sb[j] * sb[j]);
    EXPECT_LT(std::abs(ca.beta[j] - cb.beta[j]), tol) << "feature " << j;
  }
}

TEST(Environment, StallReportsAcceptanceRate) {
  Generator gen{GeneratorSpec{}};
  Rng rng(3);
  try {
    sample_environment(gen, {3.0, 1000, 50}, rng);
    FAIL() << "expected GenerationError";
  } catch (const GenerationError& e) {
    EXPECT_GE(e.acceptance_rate(), 0.0);
    EXPECT_LT(e.acceptance_rate(), 0.5);
  }
}

TEST(Environment, DeterministicGivenSeed) {
  Generator gen{GeneratorSpec{}};
  Rng a(5), b(5);
  EXPECT_EQ(sample_environment(gen, {2.0, 300, 0}, a).data.features(),
            sample_environment(gen, {2.0, 300, 0}, b).data.features());
}

TEST(Spec, Validation) {
  GeneratorSpec spec;
  spec.d_v = 3;
  EXPECT_THROW(spec.validate(), ContractError);
  EnvironmentSpec env{1.0, 10, 0};
  EXPECT_THROW(env.validate(), ContractError);
}
