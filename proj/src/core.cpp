#include "stablesel/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "stablesel/error.hpp"

namespace stablesel {

namespace {

void require_same_length(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": length mismatch (" << a << " vs " << b << ")";
    throw DimensionError(msg.str());
  }
}

void require_symmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw DimensionError(std::string(what) + ": matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ContractError(std::string(what) + ": matrix is not symmetric");
  }
}

}  // namespace

Dataset::Dataset(Matrix features, Vector outcome, std::vector<std::string> feature_names)
    : features_(std::move(features)), outcome_(std::move(outcome)), names_(std::move(feature_names)) {
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw ContractError("Dataset: need at least one row and one column");
  }
  require_same_length(features_.rows(), outcome_.size(), "Dataset");
  if (!features_.allFinite() || !outcome_.allFinite()) {
    throw ContractError("Dataset: non-finite entry");
  }
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < features_.cols(); ++j) names_.push_back("x" + std::to_string(j + 1));
  } else if (names_.size() != d()) {
    throw DimensionError("Dataset: feature_names length differs from column count");
  }
}

Dataset Dataset::select_columns(const std::vector<std::size_t>& columns) const {
  Matrix x(features_.rows(), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] >= d()) throw DimensionError("select_columns: index out of range");
    x.col(static_cast<Eigen::Index>(k)) = features_.col(static_cast<Eigen::Index>(columns[k]));
    names.push_back(names_[columns[k]]);
  }
  return Dataset(std::move(x), outcome_, std::move(names));
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
  Matrix x(static_cast<Eigen::Index>(rows.size()), features_.cols());
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= n()) throw DimensionError("select_rows: index out of range");
    const auto i = static_cast<Eigen::Index>(rows[k]);
    x.row(static_cast<Eigen::Index>(k)) = features_.row(i);
    y[static_cast<Eigen::Index>(k)] = outcome_[i];
  }
  return Dataset(std::move(x), std::move(y), names_);
}

WeightVector WeightVector::normalized(const Vector& raw) {
  if (raw.size() == 0) throw ContractError("WeightVector: empty");
  if (!raw.allFinite() || raw.minCoeff() <= 0.0) {
    throw ContractError("WeightVector: weights must be finite and strictly positive");
  }
  return WeightVector(raw / raw.mean());
}

WeightVector WeightVector::uniform(std::size_t n) {
  return WeightVector(Vector::Ones(static_cast<Eigen::Index>(n)));
}

double weighted_mean(const Vector& v, const WeightVector& w) {
  require_same_length(v.size(), w.values().size(), "weighted_mean");
  return v.dot(w.values()) / static_cast<double>(v.size());
}

double weighted_cov(const Vector& a, const Vector& b, const Vector& w) {
  require_same_length(a.size(), b.size(), "weighted_cov");
  require_same_length(a.size(), w.size(), "weighted_cov");
  const Vector p = w / w.sum();
  const double ma = p.dot(a);
  const double mb = p.dot(b);
  // Centered form; algebraically equal to sum p a b - (sum p a)(sum p b).
  return (p.array() * (a.array() - ma) * (b.array() - mb)).sum();
}

double weighted_cov(const Vector& a, const Vector& b, const WeightVector& w) {
  return weighted_cov(a, b, w.values());
}

Matrix weighted_cov_matrix(const Matrix& x, const Vector& w) {
  require_same_length(x.rows(), w.size(), "weighted_cov_matrix");
  const Vector p = w / w.sum();
  const Eigen::RowVectorXd mean = p.transpose() * x;
  const Matrix centered = x.rowwise() - mean;
  return centered.transpose() * p.asDiagonal() * centered;
}

double max_abs_offdiag_cov(const Matrix& x, const Vector& w) {
  Matrix c = weighted_cov_matrix(x, w);
  c.diagonal().setZero();
  return c.cwiseAbs().maxCoeff();
}

double pearson(const Vector& a, const Vector& b) {
  require_same_length(a.size(), b.size(), "pearson");
  const Vector u = Vector::Ones(a.size());
  const double cab = weighted_cov(a, b, u);
  const double caa = weighted_cov(a, a, u);
  const double cbb = weighted_cov(b, b, u);
  if (caa <= 0.0 || cbb <= 0.0) return 0.0;
  return cab / std::sqrt(caa * cbb);
}

Vector solve_spd(const Matrix& a, const Vector& b) {
  require_symmetric(a, "solve_spd");
  require_same_length(a.rows(), b.size(), "solve_spd");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double ratio = hi > 0.0 ? lo / hi : -1.0;
  if (!(ratio > kConditionTolerance)) {
    std::ostringstream msg;
    msg << "solve_spd: matrix is singular or ill-conditioned (min/max eigenvalue ratio " << ratio << ")";
    throw SingularityError(msg.str(), ratio);
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw SingularityError("solve_spd: Cholesky failed", ratio);
  return llt.solve(b);
}

double min_eigenvalue(const Matrix& a) {
  require_symmetric(a, "min_eigenvalue");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace stablesel
