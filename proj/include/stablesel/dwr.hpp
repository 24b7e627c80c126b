#pragma once

#include <cstddef>

#include "stablesel/core.hpp"

namespace stablesel::dwr {

struct DwrConfig {
  double lambda1 = 0.05;
  double lambda2 = 0.05;
  double learning_rate = 1e-3;
  std::size_t max_iters = 5000;
  double grad_tol = 1e-6;
  void validate() const;
};

// Decorrelation objective on raw (pre-softplus) parameters, w = softplus(raw):
//   sum_{i != j} cov(X_i, X_j; w)^2 + lambda1 (sum w - 1)^2 + lambda2 sum w^2
// with cov taken under w / sum(w).
double dwr_loss(const Dataset& data, const Vector& raw_weights, const DwrConfig& cfg);

// Loss plus its analytic gradient with respect to the raw parameters.
double dwr_loss_and_gradient(const Matrix& x, const Vector& raw_weights, const DwrConfig& cfg, Vector* grad);

struct DwrFit {
  WeightVector weights;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t iterations = 0;
  double max_abs_cov = 0.0;  // largest off-diagonal |cov| under the returned weights
};

// Starting point: softplus(raw) = 1/n, i.e. uniform weights summing to one.
double initial_raw_weight(std::size_t n);

// Adam on the raw parameters. Stops at max_iters or when the gradient's
// infinity norm drops below grad_tol, and returns the best iterate seen,
// renormalized to mean 1. Throws DivergenceError on a non-finite loss.
DwrFit dwr_fit(const Dataset& data, const DwrConfig& cfg);

}  // namespace stablesel::dwr
