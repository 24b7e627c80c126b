#include "stablesel/dwr.hpp"

#include <cmath>
#include <limits>

#include "stablesel/error.hpp"

namespace stablesel::dwr {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

void DwrConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ContractError("DwrConfig: lambdas must be non-negative");
  if (!(learning_rate > 0.0)) throw ContractError("DwrConfig: learning_rate must be positive");
  if (max_iters < 1) throw ContractError("DwrConfig: max_iters must be at least 1");
}

double dwr_loss_and_gradient(const Matrix& x, const Vector& raw, const DwrConfig& cfg, Vector* grad) {
  if (raw.size() != x.rows()) throw DimensionError("dwr_loss: raw weight length differs from sample count");
  const Vector w = raw.unaryExpr([](double r) { return softplus(r); });
  const double total = w.sum();
  const Vector p = w / total;
  const Eigen::RowVectorXd mean = p.transpose() * x;
  const Matrix centered = x.rowwise() - mean;
  Matrix cov = centered.transpose() * (centered.array().colwise() * p.array()).matrix();
  cov.diagonal().setZero();

  const double loss = cov.squaredNorm() + cfg.lambda1 * (total - 1.0) * (total - 1.0) + cfg.lambda2 * w.squaredNorm();
  if (grad == nullptr) return loss;

  // d loss / d p_k = 2 c_k^T C_off c_k up to a k-independent constant, which
  // the simplex projection (g - p.g) / total removes.
  const Vector g = 2.0 * (centered * cov).cwiseProduct(centered).rowwise().sum();
  const double g_mean = p.dot(g);
  Vector dw = (g.array() - g_mean) / total;
  dw.array() += 2.0 * cfg.lambda1 * (total - 1.0);
  dw += 2.0 * cfg.lambda2 * w;
  *grad = dw.cwiseProduct(raw.unaryExpr([](double r) { return sigmoid(r); }));
  return loss;
}

double dwr_loss(const Dataset& data, const Vector& raw, const DwrConfig& cfg) {
  return dwr_loss_and_gradient(data.features(), raw, cfg, nullptr);
}

double initial_raw_weight(std::size_t n) {
  // softplus^-1(1/n) = log(expm1(1/n))
  return std::log(std::expm1(1.0 / static_cast<double>(n)));
}

DwrFit dwr_fit(const Dataset& data, const DwrConfig& cfg) {
  cfg.validate();
  if (data.n() < 2) throw ContractError("dwr_fit: need at least two samples");
  const Matrix& x = data.features();
  const auto n = static_cast<Eigen::Index>(data.n());

  Vector raw = Vector::Constant(n, initial_raw_weight(data.n()));
  Vector m = Vector::Zero(n);
  Vector v = Vector::Zero(n);
  Vector grad(n);
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;

  Vector best = raw;
  double best_loss = std::numeric_limits<double>::infinity();
  double initial_loss = 0.0;
  std::size_t iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    const double loss = dwr_loss_and_gradient(x, raw, cfg, &grad);
    if (!std::isfinite(loss) || !grad.allFinite()) {
      throw DivergenceError("dwr_fit: non-finite loss at iteration " + std::to_string(iter), iter);
    }
    if (iter == 0) initial_loss = loss;
    if (loss < best_loss) {
      best_loss = loss;
      best = raw;
    }
    if (grad.lpNorm<Eigen::Infinity>() < cfg.grad_tol) break;
    const double t = static_cast<double>(iter + 1);
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    raw.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
  if (iter == cfg.max_iters) {
    const double loss = dwr_loss_and_gradient(x, raw, cfg, nullptr);
    if (!std::isfinite(loss)) throw DivergenceError("dwr_fit: non-finite final loss", iter);
    if (loss < best_loss) {
      best_loss = loss;
      best = raw;
    }
  }

  const Vector w = best.unaryExpr([](double r) { return softplus(r); });
  DwrFit fit{WeightVector::normalized(w), initial_loss, best_loss, iter, 0.0};
  fit.max_abs_cov = max_abs_offdiag_cov(x, fit.weights.values());
  return fit;
}

}  // namespace stablesel::dwr
