#include "stablesel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "stablesel/error.hpp"

namespace stablesel::oracle {

namespace {

// Mixed-radix key of the subset's support indices at an x-cell.
std::size_t subset_key(const DiscreteJoint& joint, const std::vector<std::size_t>& idx, std::uint32_t mask) {
  std::size_t key = 0;
  for (std::size_t f = 0; f < joint.d(); ++f) {
    if (mask & (1u << f)) key = key * joint.feature_supports()[f].size() + idx[f];
  }
  return key;
}

std::size_t subset_cells(const DiscreteJoint& joint, std::uint32_t mask) {
  std::size_t cells = 1;
  for (std::size_t f = 0; f < joint.d(); ++f) {
    if (mask & (1u << f)) cells *= joint.feature_supports()[f].size();
  }
  return cells;
}

std::vector<std::vector<std::size_t>> all_x_indices(const DiscreteJoint& joint) {
  std::vector<std::vector<std::size_t>> out(joint.num_x_cells());
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) out[c] = joint.x_indices(c);
  return out;
}

Vector cond_expectation_mask(const DiscreteJoint& joint, std::uint32_t mask,
                             const std::vector<std::vector<std::size_t>>& idx) {
  const std::size_t keys = subset_cells(joint, mask);
  std::vector<double> num(keys, 0.0), den(keys, 0.0);
  const auto& ys = joint.outcome_support();
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const std::size_t k = subset_key(joint, idx[c], mask);
    for (std::size_t y = 0; y < ys.size(); ++y) num[k] += joint.prob(c, y) * ys[y];
    den[k] += joint.x_marginal(c);
  }
  Vector out(static_cast<Eigen::Index>(joint.num_x_cells()));
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const std::size_t k = subset_key(joint, idx[c], mask);
    out[static_cast<Eigen::Index>(c)] = num[k] / den[k];
  }
  return out;
}

// P(Y = y | X_S = x_S) laid out like the joint's conditional table.
std::vector<double> cond_outcome_mask(const DiscreteJoint& joint, std::uint32_t mask,
                                      const std::vector<std::vector<std::size_t>>& idx) {
  const std::size_t keys = subset_cells(joint, mask);
  const std::size_t ny = joint.num_outcomes();
  std::vector<double> num(keys * ny, 0.0), den(keys, 0.0);
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const std::size_t k = subset_key(joint, idx[c], mask);
    for (std::size_t y = 0; y < ny; ++y) num[k * ny + y] += joint.prob(c, y);
    den[k] += joint.x_marginal(c);
  }
  std::vector<double> out(joint.num_x_cells() * ny);
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const std::size_t k = subset_key(joint, idx[c], mask);
    for (std::size_t y = 0; y < ny; ++y) out[c * ny + y] = num[k * ny + y] / den[k];
  }
  return out;
}

std::vector<std::uint32_t> minimal_masks(const std::vector<std::uint32_t>& family) {
  std::vector<std::uint32_t> out;
  for (auto m : family) {
    bool minimal = true;
    for (auto o : family) {
      if (o != m && (o & m) == o) {
        minimal = false;
        break;
      }
    }
    if (minimal) out.push_back(m);
  }
  return out;
}

// The family must be exactly {S : root subset of S}.
bool is_upper_lattice(const std::vector<std::uint32_t>& family, std::uint32_t root, std::size_t d) {
  std::vector<std::uint32_t> expected;
  for (std::uint32_t m = 0; m < (1u << d); ++m) {
    if ((m & root) == root) expected.push_back(m);
  }
  return expected == family;
}

std::vector<std::uint32_t> stable_masks(const DiscreteJoint& joint, double tol) {
  const auto idx = all_x_indices(joint);
  const std::uint32_t full = (1u << joint.d()) - 1;
  const Vector reference = cond_expectation_mask(joint, full, idx);
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = 0; m <= full; ++m) {
    const Vector e = cond_expectation_mask(joint, m, idx);
    if ((e - reference).cwiseAbs().maxCoeff() <= tol) out.push_back(m);
  }
  return out;
}

std::vector<std::uint32_t> blanket_masks(const DiscreteJoint& joint, double tol) {
  const auto idx = all_x_indices(joint);
  const std::uint32_t full = (1u << joint.d()) - 1;
  const auto reference = cond_outcome_mask(joint, full, idx);
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = 0; m <= full; ++m) {
    const auto p = cond_outcome_mask(joint, m, idx);
    double worst = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) worst = std::max(worst, std::abs(p[k] - reference[k]));
    if (worst <= tol) out.push_back(m);
  }
  return out;
}

std::uint32_t minimal_stable_mask(const DiscreteJoint& joint, double tol) {
  const auto family = stable_masks(joint, tol);
  const auto minimal = minimal_masks(family);
  if (minimal.size() != 1) {
    throw TheoryViolation("minimal_stable_set: " + std::to_string(minimal.size()) + " minimal stable sets");
  }
  if (!is_upper_lattice(family, minimal.front(), joint.d())) {
    throw TheoryViolation("minimal_stable_set: stable sets are not the supersets of " +
                          format_set(from_mask(minimal.front(), joint.d())));
  }
  return minimal.front();
}

}  // namespace

DiscreteJoint::DiscreteJoint(std::vector<std::vector<double>> feature_supports, std::vector<double> outcome_support,
                             std::vector<double> probs)
    : supports_(std::move(feature_supports)), outcome_(std::move(outcome_support)), probs_(std::move(probs)) {
  if (supports_.empty() || supports_.size() > kMaxFeatures) {
    throw ContractError("DiscreteJoint: need 1 to 5 features");
  }
  for (const auto& s : supports_) {
    if (s.empty() || s.size() > kMaxSupport) throw ContractError("DiscreteJoint: each support needs 1 to 5 values");
    num_x_cells_ *= s.size();
  }
  if (outcome_.empty()) throw ContractError("DiscreteJoint: empty outcome support");
  if (probs_.size() != num_x_cells_ * outcome_.size()) {
    throw DimensionError("DiscreteJoint: expected " + std::to_string(num_x_cells_ * outcome_.size()) +
                         " probabilities, got " + std::to_string(probs_.size()));
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) throw ContractError("DiscreteJoint: probabilities must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ContractError("DiscreteJoint: probabilities do not sum to 1");
  for (double& p : probs_) p /= total;
  x_marginal_.assign(num_x_cells_, 0.0);
  for (std::size_t c = 0; c < num_x_cells_; ++c) {
    for (std::size_t y = 0; y < outcome_.size(); ++y) x_marginal_[c] += prob(c, y);
    if (!(x_marginal_[c] > 0.0)) {
      throw ContractError("DiscreteJoint: x-cell " + std::to_string(c) + " has zero mass (positivity violated)");
    }
  }
}

DiscreteJoint DiscreteJoint::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    return DiscreteJoint(j.at("feature_supports").get<std::vector<std::vector<double>>>(),
                         j.at("outcome_support").get<std::vector<double>>(), j.at("probs").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("joint json: ") + e.what());
  }
}

std::string DiscreteJoint::to_json() const {
  nlohmann::json j;
  j["feature_supports"] = supports_;
  j["outcome_support"] = outcome_;
  j["probs"] = probs_;
  return j.dump();
}

std::vector<std::size_t> DiscreteJoint::x_indices(std::size_t cell) const {
  std::vector<std::size_t> idx(d());
  for (std::size_t f = d(); f-- > 0;) {
    idx[f] = cell % supports_[f].size();
    cell /= supports_[f].size();
  }
  return idx;
}

std::size_t DiscreteJoint::x_cell(const std::vector<std::size_t>& indices) const {
  if (indices.size() != d()) throw DimensionError("x_cell: wrong number of indices");
  std::size_t cell = 0;
  for (std::size_t f = 0; f < d(); ++f) cell = cell * supports_[f].size() + indices[f];
  return cell;
}

double DiscreteJoint::feature_value(std::size_t cell, std::size_t feature) const {
  return supports_[feature][x_indices(cell)[feature]];
}

std::uint32_t to_mask(const FeatureSet& s) {
  std::uint32_t m = 0;
  for (auto f : s) m |= 1u << f;
  return m;
}

FeatureSet from_mask(std::uint32_t mask, std::size_t d) {
  FeatureSet s;
  for (std::size_t f = 0; f < d; ++f) {
    if (mask & (1u << f)) s.push_back(f);
  }
  return s;
}

bool is_subset(const FeatureSet& a, const FeatureSet& b) { return (to_mask(a) & ~to_mask(b)) == 0; }

std::string format_set(const FeatureSet& s) {
  std::ostringstream out;
  out << '{';
  for (std::size_t k = 0; k < s.size(); ++k) out << (k ? ", " : "") << 'X' << (s[k] + 1);
  out << '}';
  return out.str();
}

std::map<std::vector<std::size_t>, double> cond_expectation(const DiscreteJoint& joint, const FeatureSet& subset) {
  const Vector by_cell = cond_expectation_by_cell(joint, subset);
  std::map<std::vector<std::size_t>, double> table;
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const auto idx = joint.x_indices(c);
    std::vector<std::size_t> key;
    for (auto f : subset) key.push_back(idx[f]);
    table.emplace(std::move(key), by_cell[static_cast<Eigen::Index>(c)]);
  }
  return table;
}

Vector cond_expectation_by_cell(const DiscreteJoint& joint, const FeatureSet& subset) {
  for (auto f : subset) {
    if (f >= joint.d()) throw DimensionError("cond_expectation: feature index out of range");
  }
  return cond_expectation_mask(joint, to_mask(subset), all_x_indices(joint));
}

std::vector<FeatureSet> stable_sets(const DiscreteJoint& joint, double tol) {
  std::vector<FeatureSet> out;
  for (auto m : stable_masks(joint, tol)) out.push_back(from_mask(m, joint.d()));
  return out;
}

FeatureSet minimal_stable_set(const DiscreteJoint& joint, double tol) {
  return from_mask(minimal_stable_mask(joint, tol), joint.d());
}

std::vector<FeatureSet> markov_blankets(const DiscreteJoint& joint, double tol) {
  std::vector<FeatureSet> out;
  for (auto m : blanket_masks(joint, tol)) out.push_back(from_mask(m, joint.d()));
  return out;
}

FeatureSet markov_boundary(const DiscreteJoint& joint, double tol) {
  const auto family = blanket_masks(joint, tol);
  const auto minimal = minimal_masks(family);
  if (minimal.size() != 1) {
    throw TheoryViolation("markov_boundary: " + std::to_string(minimal.size()) + " minimal blankets");
  }
  if (!is_upper_lattice(family, minimal.front(), joint.d())) {
    throw TheoryViolation("markov_boundary: blankets are not the supersets of the boundary");
  }
  const std::uint32_t stable = minimal_stable_mask(joint, tol);
  if ((stable & ~minimal.front()) != 0) {
    throw TheoryViolation("markov_boundary: minimal stable set " + format_set(from_mask(stable, joint.d())) +
                          " is not inside the boundary " + format_set(from_mask(minimal.front(), joint.d())));
  }
  return from_mask(minimal.front(), joint.d());
}

Vector independence_weights(const DiscreteJoint& joint) {
  std::vector<std::vector<double>> marginals(joint.d());
  for (std::size_t f = 0; f < joint.d(); ++f) marginals[f].assign(joint.feature_supports()[f].size(), 0.0);
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const auto idx = joint.x_indices(c);
    for (std::size_t f = 0; f < joint.d(); ++f) marginals[f][idx[f]] += joint.x_marginal(c);
  }
  Vector w(static_cast<Eigen::Index>(joint.num_x_cells()));
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const auto idx = joint.x_indices(c);
    double product = 1.0;
    for (std::size_t f = 0; f < joint.d(); ++f) product *= marginals[f][idx[f]];
    w[static_cast<Eigen::Index>(c)] = product / joint.x_marginal(c);
  }
  return w;
}

DiscreteJoint reweight(const DiscreteJoint& joint, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != joint.num_x_cells()) throw DimensionError("reweight: one weight per x-cell");
  std::vector<double> probs(joint.probs().size());
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    for (std::size_t y = 0; y < joint.num_outcomes(); ++y) {
      probs[c * joint.num_outcomes() + y] = w[static_cast<Eigen::Index>(c)] * joint.prob(c, y);
    }
  }
  return DiscreteJoint(joint.feature_supports(), joint.outcome_support(), std::move(probs));
}

double independence_residual(const DiscreteJoint& joint) {
  const Vector w = independence_weights(joint);
  double worst = 0.0;
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const double product = w[static_cast<Eigen::Index>(c)] * joint.x_marginal(c);
    worst = std::max(worst, std::abs(product - joint.x_marginal(c)));
  }
  return worst;
}

std::vector<double> conditional_outcome(const DiscreteJoint& joint) {
  std::vector<double> out(joint.probs().size());
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    for (std::size_t y = 0; y < joint.num_outcomes(); ++y) {
      out[c * joint.num_outcomes() + y] = joint.prob(c, y) / joint.x_marginal(c);
    }
  }
  return out;
}

regress::Coefficients population_wls(const DiscreteJoint& joint, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != joint.num_x_cells()) {
    throw DimensionError("population_wls: one weight per x-cell");
  }
  const auto d = static_cast<Eigen::Index>(joint.d());
  Matrix sigma = Matrix::Zero(d + 1, d + 1);
  Vector rhs = Vector::Zero(d + 1);
  Vector z(d + 1);
  const auto& ys = joint.outcome_support();
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const auto idx = joint.x_indices(c);
    for (Eigen::Index f = 0; f < d; ++f) z[f] = joint.feature_supports()[static_cast<std::size_t>(f)][idx[static_cast<std::size_t>(f)]];
    z[d] = 1.0;
    const double mass = w[static_cast<Eigen::Index>(c)] * joint.x_marginal(c);
    double y_mass = 0.0;
    for (std::size_t y = 0; y < ys.size(); ++y) y_mass += joint.prob(c, y) * ys[y];
    sigma += mass * z * z.transpose();
    rhs += w[static_cast<Eigen::Index>(c)] * y_mass * z;
  }
  const Vector sol = solve_spd(0.5 * (sigma + sigma.transpose()), rhs);
  return regress::Coefficients{sol.head(d), sol[d]};
}

double weighted_feature_outcome_cov(const DiscreteJoint& joint, const Vector& w, std::size_t feature) {
  double total = 0.0, ex = 0.0, ey = 0.0, exy = 0.0;
  const auto& ys = joint.outcome_support();
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const double x = joint.feature_value(c, feature);
    const double wc = w[static_cast<Eigen::Index>(c)];
    double y_mass = 0.0;
    for (std::size_t y = 0; y < ys.size(); ++y) y_mass += joint.prob(c, y) * ys[y];
    total += wc * joint.x_marginal(c);
    ex += wc * joint.x_marginal(c) * x;
    ey += wc * y_mass;
    exy += wc * y_mass * x;
  }
  return exy / total - (ex / total) * (ey / total);
}

Dataset sample(const DiscreteJoint& joint, std::size_t n, Rng& rng, std::vector<std::size_t>* cells) {
  std::vector<double> cdf(joint.probs().size());
  std::partial_sum(joint.probs().begin(), joint.probs().end(), cdf.begin());
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(joint.d()));
  Vector y(static_cast<Eigen::Index>(n));
  if (cells != nullptr) cells->assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto flat = static_cast<std::size_t>(it - cdf.begin());
    const std::size_t c = flat / joint.num_outcomes();
    const auto idx = joint.x_indices(c);
    for (std::size_t f = 0; f < joint.d(); ++f) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = joint.feature_supports()[f][idx[f]];
    }
    y[static_cast<Eigen::Index>(i)] = joint.outcome_support()[flat % joint.num_outcomes()];
    if (cells != nullptr) (*cells)[i] = c;
  }
  return Dataset(std::move(x), std::move(y));
}

Vector perturb_weights(const DiscreteJoint& joint, const Vector& w, double eps, Rng& rng) {
  if (static_cast<std::size_t>(w.size()) != joint.num_x_cells()) throw DimensionError("perturb_weights: one weight per x-cell");
  Vector u(w.size());
  for (auto& v : u) v = rng.uniform(-1.0, 1.0);
  double second = 0.0;
  for (std::size_t c = 0; c < joint.num_x_cells(); ++c) {
    const auto k = static_cast<Eigen::Index>(c);
    second += joint.x_marginal(c) * w[k] * w[k] * u[k] * u[k];
  }
  const double scale = second > 0.0 ? std::min(eps / std::sqrt(second), 0.9) : 0.0;
  return w.array() * (1.0 + scale * u.array());
}

PlantedJoint random_planted_joint(Rng& rng, std::size_t max_d, std::size_t max_support) {
  if (max_d < 1 || max_d > kMaxFeatures || max_support < 2 || max_support > kMaxSupport) {
    throw ContractError("random_planted_joint: bad size limits");
  }
  const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_int(max_d));
  std::vector<std::vector<double>> supports(d);
  for (auto& s : supports) {
    const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform_int(max_support - 1));
    // Distinct values: a random increasing grid.
    double v = rng.uniform(-2.0, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      s.push_back(v);
      v += rng.uniform(0.25, 1.5);
    }
  }
  std::uint32_t mean_mask = 0, blanket_mask = 0;
  for (std::size_t f = 0; f < d; ++f) {
    if (rng.uniform() < 0.5) mean_mask |= 1u << f;
  }
  blanket_mask = mean_mask;
  for (std::size_t f = 0; f < d; ++f) {
    if (rng.uniform() < 0.5) blanket_mask |= 1u << f;
  }

  std::size_t cells = 1;
  for (const auto& s : supports) cells *= s.size();
  std::vector<double> px(cells);
  for (auto& p : px) p = rng.uniform(0.05, 1.0);

  // Tables indexed by the mixed-radix key of the relevant subset; keys are
  // computed with a throwaway joint that only carries the supports.
  DiscreteJoint shape(supports, {0.0}, std::vector<double>(cells, 1.0 / static_cast<double>(cells)));
  std::vector<double> mean_table(subset_cells(shape, mean_mask));
  for (auto& m : mean_table) m = rng.uniform(-0.3, 0.3);
  std::vector<double> spread_table(subset_cells(shape, blanket_mask));
  for (auto& s : spread_table) s = rng.uniform(0.4, 0.9);

  std::vector<double> probs(cells * 3);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto idx = shape.x_indices(c);
    const double mu = mean_table[subset_key(shape, idx, mean_mask)];
    const double s = spread_table[subset_key(shape, idx, blanket_mask)];
    probs[c * 3 + 0] = px[c] * (s - mu) / 2.0;
    probs[c * 3 + 1] = px[c] * (1.0 - s);
    probs[c * 3 + 2] = px[c] * (s + mu) / 2.0;
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (auto& p : probs) p /= total;
  return PlantedJoint{DiscreteJoint(std::move(supports), {-1.0, 0.0, 1.0}, std::move(probs)),
                      from_mask(mean_mask, d), from_mask(blanket_mask, d)};
}

DiscreteJoint heteroskedastic_example() {
  // Three-point discretization of N(0,1) on the bins (-inf,-.5], (-.5,.5], (.5,inf).
  const double edge = 0.5 * std::erfc(0.5 / std::sqrt(2.0));
  const double mid = 1.0 - 2.0 * edge;
  const std::vector<double> values{-1.0, 0.0, 1.0};
  const std::vector<double> marginal{edge, mid, edge};
  std::vector<double> probs;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      const double mean = 0.3 * values[a];               // f(X1)
      const double spread = 0.5 + 0.3 * std::abs(values[b]);  // noise scale driven by X2
      const double px = marginal[a] * marginal[b];
      probs.push_back(px * (spread - mean) / 2.0);
      probs.push_back(px * (1.0 - spread));
      probs.push_back(px * (spread + mean) / 2.0);
    }
  }
  return DiscreteJoint({values, values}, {-1.0, 0.0, 1.0}, std::move(probs));
}

SuiteReport run_theorem_suite(std::size_t instances, std::uint64_t seed, std::size_t max_d, std::size_t max_support) {
  SuiteReport report;
  Rng rng(seed);
  for (std::size_t k = 0; k < instances; ++k) {
    Rng inst_rng = rng.fork(k);
    const PlantedJoint planted = random_planted_joint(inst_rng, max_d, max_support);
    const DiscreteJoint& joint = planted.joint;
    ++report.instances;
    const std::string tag = "instance " + std::to_string(k) + ": ";
    try {
      const auto stable = stable_sets(joint);
      const FeatureSet minimal = minimal_stable_set(joint);
      std::vector<FeatureSet> supersets;
      for (std::uint32_t m = 0; m < (1u << joint.d()); ++m) {
        if ((m & to_mask(minimal)) == to_mask(minimal)) supersets.push_back(from_mask(m, joint.d()));
      }
      if (stable == supersets) ++report.lattice_ok;
      else report.failures.push_back(tag + "stable sets differ from the superset lattice");

      const FeatureSet boundary = markov_boundary(joint);
      if (is_subset(minimal, boundary)) ++report.inclusion_ok;
      else report.failures.push_back(tag + "minimal stable set not inside the boundary");
      if (minimal == planted.mean_set && boundary == planted.blanket) ++report.planted_match;

      const Vector w = independence_weights(joint);
      const auto coef = population_wls(joint, w);
      double outside = 0.0;
      for (std::size_t f = 0; f < joint.d(); ++f) {
        if (!std::binary_search(minimal.begin(), minimal.end(), f)) {
          outside = std::max(outside, std::abs(coef.beta[static_cast<Eigen::Index>(f)]));
        }
      }
      report.max_outside_coef = std::max(report.max_outside_coef, outside);
      if (outside < 1e-10) ++report.zero_coef_ok;
      else report.failures.push_back(tag + "coefficient outside the minimal stable set = " + std::to_string(outside));

      for (auto f : minimal) {
        if (std::abs(weighted_feature_outcome_cov(joint, w, f)) > 1e-9) {
          ++report.nonzero_checked;
          if (std::abs(coef.beta[static_cast<Eigen::Index>(f)]) > 1e-6) ++report.nonzero_ok;
          else report.failures.push_back(tag + "stable feature with vanishing coefficient");
        } else {
          ++report.nonzero_skipped;
        }
      }

      const auto before = conditional_outcome(joint);
      const auto after = conditional_outcome(reweight(joint, w));
      double drift = 0.0;
      for (std::size_t i = 0; i < before.size(); ++i) drift = std::max(drift, std::abs(before[i] - after[i]));
      if (drift <= 1e-12) ++report.invariance_ok;
      else report.failures.push_back(tag + "P(Y|X) changed under reweighting");
    } catch (const std::exception& e) {
      report.failures.push_back(tag + e.what());
    }
  }
  return report;
}

}  // namespace stablesel::oracle
