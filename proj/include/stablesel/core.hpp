#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stablesel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// n x d covariates plus an outcome per row. Immutable once built.
class Dataset {
 public:
  // Names default to x1..xd. Throws ContractError on non-finite entries or
  // empty shapes and DimensionError on mismatched lengths.
  Dataset(Matrix features, Vector outcome, std::vector<std::string> feature_names = {});

  std::size_t n() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(features_.cols()); }
  const Matrix& features() const { return features_; }
  const Vector& outcome() const { return outcome_; }
  const std::vector<std::string>& feature_names() const { return names_; }

  // Keeps the listed columns, in the given order.
  Dataset select_columns(const std::vector<std::size_t>& columns) const;
  Dataset select_rows(const std::vector<std::size_t>& rows) const;

 private:
  Matrix features_;
  Vector outcome_;
  std::vector<std::string> names_;
};

// Strictly positive per-sample weights with mean exactly 1 (up to rounding).
class WeightVector {
 public:
  // Divides by the mean. Entries must be finite and strictly positive.
  static WeightVector normalized(const Vector& raw);
  static WeightVector uniform(std::size_t n);

  std::size_t size() const { return static_cast<std::size_t>(w_.size()); }
  const Vector& values() const { return w_; }
  double operator[](std::size_t i) const { return w_[static_cast<Eigen::Index>(i)]; }

 private:
  explicit WeightVector(Vector w) : w_(std::move(w)) {}
  Vector w_;
};

// (1/n) sum_i w_i v_i
double weighted_mean(const Vector& v, const WeightVector& w);

// Covariance under the probability vector w / sum(w).
double weighted_cov(const Vector& a, const Vector& b, const WeightVector& w);
// Same, for raw non-negative weights that need not be mean-normalized.
double weighted_cov(const Vector& a, const Vector& b, const Vector& w);

// Full d x d weighted covariance of the columns of x.
Matrix weighted_cov_matrix(const Matrix& x, const Vector& w);

// Largest off-diagonal |cov(X_i, X_j; w)|.
double max_abs_offdiag_cov(const Matrix& x, const Vector& w);

double pearson(const Vector& a, const Vector& b);

// Symmetric positive-definite solve via Cholesky. Throws SingularityError when
// min eigenvalue <= kConditionTolerance * max eigenvalue, ContractError when A
// is not symmetric.
Vector solve_spd(const Matrix& a, const Vector& b);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& a);

inline constexpr double kConditionTolerance = 1e-10;

}  // namespace stablesel
