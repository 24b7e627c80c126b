#include <gtest/gtest.h>

#include <cmath>

#include "stablesel/core.hpp"
#include "stablesel/error.hpp"
#include "stablesel/rng.hpp"

using namespace stablesel;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix random_spd(std::size_t d, Rng& rng) {
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a * a.transpose() + Matrix::Identity(d, d) * 0.5;
}

}  // namespace

TEST(Dataset, RejectsShapeMismatchAndNonFinite) {
  EXPECT_THROW(Dataset(Matrix::Zero(3, 2), Vector::Zero(2)), DimensionError);
  EXPECT_THROW(Dataset(Matrix::Zero(0, 2), Vector::Zero(0)), ContractError);
  EXPECT_THROW(Dataset(Matrix::Zero(2, 0), Vector::Zero(2)), ContractError);
  Matrix x = Matrix::Zero(2, 2);
  x(1, 1) = std::nan("");
  EXPECT_THROW(Dataset(x, Vector::Zero(2)), ContractError);
  Vector y = Vector::Zero(2);
  y[0] = INFINITY;
  EXPECT_THROW(Dataset(Matrix::Zero(2, 2), y), ContractError);
}

TEST(Dataset, DefaultNamesAndColumnSelection) {
  Matrix x(2, 3);
  x << 1, 2, 3, 4, 5, 6;
  Dataset d(x, vec({7, 8}));
  EXPECT_EQ(d.feature_names(), (std::vector<std::string>{"x1", "x2", "x3"}));
  const auto s = d.select_columns({2, 0});
  EXPECT_EQ(s.d(), 2u);
  EXPECT_EQ(s.features()(1, 0), 6);
  EXPECT_EQ(s.feature_names()[1], "x1");
  const auto r = d.select_rows({1});
  EXPECT_EQ(r.n(), 1u);
  EXPECT_EQ(r.outcome()[0], 8);
}

TEST(WeightVector, NormalizesToMeanOne) {
  const auto w = WeightVector::normalized(vec({2, 4, 6}));
  EXPECT_NEAR(w.values().mean(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_THROW(WeightVector::normalized(vec({1, 0})), ContractError);
  EXPECT_THROW(WeightVector::normalized(vec({1, -1})), ContractError);
}

TEST(WeightedMean, Examples) {
  EXPECT_DOUBLE_EQ(weighted_mean(vec({1, 2, 3}), WeightVector::uniform(3)), 2.0);
  // frozen from a hand evaluation of (1/n) sum w_i v_i
  EXPECT_NEAR(weighted_mean(vec({1, 0}), WeightVector::normalized(vec({2, 1e-4}))), 0.9999500024998749, 1e-15);
  EXPECT_DOUBLE_EQ(weighted_mean(vec({0, 0, 0}), WeightVector::normalized(vec({1, 5, 2}))), 0.0);
  EXPECT_THROW(weighted_mean(vec({1, 2}), WeightVector::uniform(3)), DimensionError);
}

TEST(WeightedMean, UniformEqualsArithmeticMean) {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    Vector v(20);
    for (auto& x : v) x = rng.normal(3.0, 2.0);
    EXPECT_NEAR(weighted_mean(v, WeightVector::uniform(20)), v.mean(), 1e-12);
  }
}

TEST(WeightedCov, Examples) {
  const auto u = WeightVector::uniform(2);
  EXPECT_DOUBLE_EQ(weighted_cov(vec({1, -1}), vec({1, -1}), u), 1.0);
  EXPECT_DOUBLE_EQ(weighted_cov(vec({1, -1}), vec({-1, 1}), u), -1.0);
  EXPECT_DOUBLE_EQ(weighted_cov(vec({3, 3, 3}), vec({1, 5, 2}), WeightVector::normalized(vec({1, 2, 3}))), 0.0);
  EXPECT_THROW(weighted_cov(vec({1, 2}), vec({1, 2, 3}), WeightVector::uniform(2)), DimensionError);
}

TEST(WeightedCov, SymmetricShiftInvariantNonNegativeVariance) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    Vector a(15), b(15), raw(15);
    for (Eigen::Index i = 0; i < 15; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
      raw[i] = rng.uniform(0.1, 3.0);
    }
    const auto w = WeightVector::normalized(raw);
    EXPECT_NEAR(weighted_cov(a, b, w), weighted_cov(b, a, w), 1e-14);
    const Vector shifted = a.array() + 7.5;
    EXPECT_NEAR(weighted_cov(shifted, b, w), weighted_cov(a, b, w), 1e-12);
    EXPECT_GE(weighted_cov(a, a, w), 0.0);
  }
}

TEST(WeightedCovMatrix, MatchesPairwise) {
  Rng rng(9);
  Matrix x(30, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Vector raw(30);
  for (auto& r : raw) r = rng.uniform(0.5, 2.0);
  const auto w = WeightVector::normalized(raw);
  const Matrix c = weighted_cov_matrix(x, w.values());
  double max_off = 0;
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) {
      EXPECT_NEAR(c(i, j), weighted_cov(x.col(i), x.col(j), w), 1e-13);
      if (i != j) max_off = std::max(max_off, std::abs(c(i, j)));
    }
  EXPECT_NEAR(max_abs_offdiag_cov(x, w.values()), max_off, 1e-15);
}

TEST(SolveSpd, Examples) {
  const Vector b = vec({3, -1, 2});
  EXPECT_TRUE(solve_spd(Matrix::Identity(3, 3), b).isApprox(b));
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 4;
  const Vector x = solve_spd(a, vec({2, 8}));
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 2.0, 1e-15);
}

TEST(SolveSpd, ResidualBoundOnRandomSystems) {
  Rng rng(21);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 2 + static_cast<std::size_t>(rng.uniform_int(8));
    const Matrix a = random_spd(d, rng);
    Vector b(static_cast<Eigen::Index>(d));
    for (auto& v : b) v = rng.normal();
    const Vector x = solve_spd(a, b);
    EXPECT_LE((a * x - b).cwiseAbs().maxCoeff(), 1e-8 * (1 + b.cwiseAbs().maxCoeff()));
  }
}

TEST(SolveSpd, SingularAndNonSymmetricInputs) {
  Matrix a(2, 2);
  a << 1, 1, 1, 1;
  try {
    solve_spd(a, vec({1, 1}));
    FAIL() << "expected SingularityError";
  } catch (const SingularityError& e) {
    EXPECT_LE(e.eigen_ratio(), kConditionTolerance);
  }
  Matrix ns(2, 2);
  ns << 2, 1, 0, 2;
  EXPECT_THROW(solve_spd(ns, vec({1, 1})), ContractError);
}

TEST(MinEigenvalue, Examples) {
  EXPECT_NEAR(min_eigenvalue(Matrix::Identity(3, 3)), 1.0, 1e-14);
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 5, 0.5, 3;
  EXPECT_NEAR(min_eigenvalue(d), 0.5, 1e-14);
  Matrix a(2, 2);
  a << 2, 1, 1, 3;
  // (a+c)/2 - sqrt(((a-c)/2)^2 + b^2)
  EXPECT_NEAR(min_eigenvalue(a), 1.381966011250105, 1e-12);
  Matrix ns(2, 2);
  ns << 1, 2, 0, 1;
  EXPECT_THROW(min_eigenvalue(ns), ContractError);
}

TEST(Pearson, PerfectAndZero) {
  EXPECT_NEAR(pearson(vec({1, 2, 3}), vec({2, 4, 6})), 1.0, 1e-14);
  EXPECT_NEAR(pearson(vec({1, 2, 3}), vec({-1, -2, -3})), -1.0, 1e-14);
  EXPECT_NEAR(pearson(vec({1, -1, 1, -1}), vec({1, 1, -1, -1})), 0.0, 1e-14);
}
