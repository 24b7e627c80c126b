#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stablesel/core.hpp"
#include "stablesel/regress.hpp"
#include "stablesel/rng.hpp"

namespace stablesel::oracle {

// Sorted, duplicate-free feature indices (0-based).
using FeatureSet = std::vector<std::size_t>;

inline constexpr std::size_t kMaxFeatures = 5;
inline constexpr std::size_t kMaxSupport = 5;
inline constexpr double kEqualityTolerance = 1e-10;

// Exact finite joint over (X_1..X_d, Y). Probabilities are stored row-major
// over (x_1, ..., x_d, y) with y varying fastest; an "x-cell" is an index into
// the same layout without the y axis.
//
// Every x-cell must have positive marginal mass; individual (x, y) cells may
// be zero so deterministic outcomes are representable.
class DiscreteJoint {
 public:
  DiscreteJoint(std::vector<std::vector<double>> feature_supports, std::vector<double> outcome_support,
                std::vector<double> probs);

  static DiscreteJoint from_json(const std::string& text);
  std::string to_json() const;

  std::size_t d() const { return supports_.size(); }
  const std::vector<std::vector<double>>& feature_supports() const { return supports_; }
  const std::vector<double>& outcome_support() const { return outcome_; }
  const std::vector<double>& probs() const { return probs_; }

  std::size_t num_x_cells() const { return num_x_cells_; }
  std::size_t num_outcomes() const { return outcome_.size(); }
  double prob(std::size_t x_cell, std::size_t y) const { return probs_[x_cell * outcome_.size() + y]; }
  double x_marginal(std::size_t x_cell) const { return x_marginal_[x_cell]; }

  // Support indices of x-cell `x_cell`, one per feature.
  std::vector<std::size_t> x_indices(std::size_t x_cell) const;
  std::size_t x_cell(const std::vector<std::size_t>& indices) const;
  double feature_value(std::size_t x_cell, std::size_t feature) const;

 private:
  std::vector<std::vector<double>> supports_;
  std::vector<double> outcome_;
  std::vector<double> probs_;
  std::size_t num_x_cells_ = 1;
  std::vector<double> x_marginal_;
};

std::uint32_t to_mask(const FeatureSet& s);
FeatureSet from_mask(std::uint32_t mask, std::size_t d);
bool is_subset(const FeatureSet& a, const FeatureSet& b);
std::string format_set(const FeatureSet& s);  // "{X1, X3}"

// E[Y | S = s] keyed by the subset's support indices (in feature order).
std::map<std::vector<std::size_t>, double> cond_expectation(const DiscreteJoint& joint, const FeatureSet& subset);

// E[Y | X_S = x_S] evaluated at every x-cell.
Vector cond_expectation_by_cell(const DiscreteJoint& joint, const FeatureSet& subset);

// All S with E[Y|S] = E[Y|X] at every support point, in ascending mask order.
std::vector<FeatureSet> stable_sets(const DiscreteJoint& joint, double tol = kEqualityTolerance);

// The unique minimal stable set. Throws TheoryViolation when the minimal
// elements are not unique or the stable sets are not exactly its supersets.
FeatureSet minimal_stable_set(const DiscreteJoint& joint, double tol = kEqualityTolerance);

// All S with P(Y | X) = P(Y | X_S) everywhere, i.e. Y independent of X \ S given S.
std::vector<FeatureSet> markov_blankets(const DiscreteJoint& joint, double tol = kEqualityTolerance);

// Unique minimal blanket. Throws TheoryViolation on non-uniqueness, on a
// blanket family that is not the superset lattice of the boundary, or when
// the minimal stable set is not contained in it.
FeatureSet markov_boundary(const DiscreteJoint& joint, double tol = kEqualityTolerance);

// w(x) = prod_i P(x_i) / P(x), one entry per x-cell.
Vector independence_weights(const DiscreteJoint& joint);

// The weighted joint w(x) P(x, y); w must satisfy E_P[w] = 1.
DiscreteJoint reweight(const DiscreteJoint& joint, const Vector& w);

// max_x |P(x) - prod_i P(x_i)|
double independence_residual(const DiscreteJoint& joint);

// P(Y = y | X = x) table, x-cell major.
std::vector<double> conditional_outcome(const DiscreteJoint& joint);

// Population weighted least squares with intercept, by exact summation.
// Throws SingularityError on a singular weighted second-moment matrix.
regress::Coefficients population_wls(const DiscreteJoint& joint, const Vector& w);

// weighted-marginal covariance cov_{wP}(X_i, Y); nonzero is the linear
// dependence precondition under which a stable feature gets a nonzero
// population coefficient.
double weighted_feature_outcome_cov(const DiscreteJoint& joint, const Vector& w, std::size_t feature);

// n i.i.d. rows; `cells` (when non-null) receives each row's x-cell.
Dataset sample(const DiscreteJoint& joint, std::size_t n, Rng& rng, std::vector<std::size_t>* cells = nullptr);

// w(1 + c u) with u ~ U(-1, 1) per x-cell and c set so E_P[(w_hat - w)^2] =
// eps^2; c is capped at 0.9 to keep weights positive (then the realized
// error is smaller than eps).
Vector perturb_weights(const DiscreteJoint& joint, const Vector& w, double eps, Rng& rng);

// Random instance with planted structure: E[Y|X] depends exactly on `mean_set`,
// P(Y|X) on `blanket` (a superset). Features are correlated; every cell is
// strictly positive. Y takes values {-1, 0, 1}.
struct PlantedJoint {
  DiscreteJoint joint;
  FeatureSet mean_set;
  FeatureSet blanket;
};
PlantedJoint random_planted_joint(Rng& rng, std::size_t max_d = 4, std::size_t max_support = 3);

// Discretized heteroskedastic instance: X1, X2 independent three-point
// normals, E[Y|X] depends on X1 only and the spread of Y on X2 only.
DiscreteJoint heteroskedastic_example();

struct SuiteReport {
  std::size_t instances = 0;
  std::size_t lattice_ok = 0;       // stable sets == supersets of the minimal stable set
  std::size_t inclusion_ok = 0;     // minimal stable set within the Markov boundary
  std::size_t zero_coef_ok = 0;     // all coefficients outside it below 1e-10
  std::size_t invariance_ok = 0;    // P(Y|X) unchanged by reweighting
  std::size_t nonzero_checked = 0;  // stable features meeting the linear-dependence precondition
  std::size_t nonzero_ok = 0;
  std::size_t nonzero_skipped = 0;
  std::size_t planted_match = 0;    // recovered sets equal the planted ones
  double max_outside_coef = 0.0;
  std::vector<std::string> failures;
  bool passed() const {
    return lattice_ok == instances && inclusion_ok == instances && zero_coef_ok == instances &&
           invariance_ok == instances && nonzero_ok == nonzero_checked && failures.empty();
  }
};

SuiteReport run_theorem_suite(std::size_t instances, std::uint64_t seed, std::size_t max_d = 4,
                              std::size_t max_support = 3);

}  // namespace stablesel::oracle
