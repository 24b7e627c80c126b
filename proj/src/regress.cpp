#include "stablesel/regress.hpp"

#include <cmath>

#include "stablesel/error.hpp"

namespace stablesel::regress {

Coefficients wls(const Dataset& data, const Vector& w) {
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto d = static_cast<Eigen::Index>(data.d());
  if (w.size() != n) throw DimensionError("wls: weight length differs from sample count");
  if (!w.allFinite() || w.minCoeff() <= 0.0) throw ContractError("wls: weights must be positive");
  Matrix z(n, d + 1);
  z.leftCols(d) = data.features();
  z.col(d).setOnes();
  const Vector p = w / w.sum();
  const Matrix sigma = z.transpose() * p.asDiagonal() * z;
  const Vector rhs = z.transpose() * p.cwiseProduct(data.outcome());
  // Re-symmetrize before the SPD solve; the product is symmetric only up to rounding.
  const Vector sol = solve_spd(0.5 * (sigma + sigma.transpose()), rhs);
  return Coefficients{sol.head(d), sol[d]};
}

Coefficients wls(const Dataset& data, const WeightVector& w) { return wls(data, w.values()); }

Coefficients ols(const Dataset& data) { return wls(data, WeightVector::uniform(data.n())); }

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

Coefficients lasso(const Dataset& data, double alpha, const LassoOptions& options) {
  if (!(alpha >= 0.0)) throw ContractError("lasso: alpha must be non-negative");
  const Matrix& x = data.features();
  const auto n = static_cast<double>(data.n());
  const auto d = x.cols();

  const Eigen::RowVectorXd mean = x.colwise().mean();
  Matrix z = x.rowwise() - mean;
  Vector scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd = std::sqrt(z.col(j).squaredNorm() / n);
    scale[j] = sd;
    if (sd > 0.0) z.col(j) /= sd;
  }
  const double y_mean = data.outcome().mean();
  Vector resid = data.outcome().array() - y_mean;

  auto objective = [&](const Vector& b) {
    return resid.squaredNorm() / (2.0 * n) + alpha * b.lpNorm<1>();
  };

  Vector b = Vector::Zero(d);
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double largest = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (scale[j] == 0.0) continue;
      // Unit variance makes the coordinate curvature exactly 1.
      const double rho = z.col(j).dot(resid) / n + b[j];
      const double updated = soft_threshold(rho, alpha);
      const double delta = updated - b[j];
      if (delta != 0.0) {
        resid -= delta * z.col(j);
        b[j] = updated;
      }
      largest = std::max(largest, std::abs(delta));
    }
    if (options.objective_trace != nullptr) options.objective_trace->push_back(objective(b));
    if (largest < options.tolerance) break;
  }

  Coefficients out{Vector::Zero(d), y_mean};
  for (Eigen::Index j = 0; j < d; ++j) {
    if (scale[j] > 0.0) out.beta[j] = b[j] / scale[j];
    out.intercept -= out.beta[j] * mean[j];
  }
  return out;
}

}  // namespace stablesel::regress
