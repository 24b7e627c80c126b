#pragma once

#include <vector>

#include "stablesel/core.hpp"

namespace stablesel::regress {

struct Coefficients {
  Vector beta;  // one per feature, original feature scale
  double intercept = 0.0;

  double predict(const Eigen::Ref<const Vector>& x) const { return beta.dot(x) + intercept; }
  Vector predict(const Matrix& x) const { return (x * beta).array() + intercept; }
};

// Weighted least squares with an intercept column appended:
//   [beta; b] = (E^[w z z^T])^-1 E^[w z y],  z = (x, 1).
// Throws SingularityError when the weighted second-moment matrix is singular.
Coefficients wls(const Dataset& data, const WeightVector& w);
// Same normal equations for arbitrary positive weights; the result does not
// depend on the weights' overall scale.
Coefficients wls(const Dataset& data, const Vector& w);

Coefficients ols(const Dataset& data);

struct LassoOptions {
  double tolerance = 1e-8;        // stop when the largest coordinate update falls below this
  std::size_t max_sweeps = 100000;
  // Optional per-sweep objective trace (standardized problem).
  std::vector<double>* objective_trace = nullptr;
};

// Coordinate descent on standardized features (mean 0, unit variance with
// 1/n), minimizing (1/2n)||y_c - Z beta||^2 + alpha ||beta||_1. Returned
// coefficients are mapped back to the original feature scale. Constant
// columns get a zero coefficient.
Coefficients lasso(const Dataset& data, double alpha, const LassoOptions& options = {});

double soft_threshold(double z, double gamma);

}  // namespace stablesel::regress
