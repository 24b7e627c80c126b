#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "stablesel/core.hpp"
#include "stablesel/nnet.hpp"
#include "stablesel/rng.hpp"

namespace stablesel::synthgen {

enum class OutcomeKind { MLP, Poly };

std::string to_string(OutcomeKind kind);
OutcomeKind outcome_kind_from_string(const std::string& name);

// Stable block S (moving average of latent normals) followed by noise block V.
// Columns are ordered S_1..S_ds, V_1..V_dv.
struct GeneratorSpec {
  std::size_t d_s = 5;
  std::size_t d_v = 5;
  Vector beta = default_beta();
  double noise_sd = 0.3;
  OutcomeKind outcome_kind = OutcomeKind::Poly;
  std::uint64_t mlp_theta_seed = 0;

  // Test hooks. Production runs keep both true.
  bool clip = true;
  bool add_noise = true;

  std::size_t d() const { return d_s + d_v; }
  void validate() const;
  static Vector default_beta();
};

struct EnvironmentSpec {
  double bias_rate = 2.5;  // r, |r| > 1
  std::size_t n_target = 10000;
  // Candidates drawn before giving up; 0 means 10^4 * n_target.
  std::size_t attempt_cap = 0;
  void validate() const;
};

inline constexpr double kClipBound = 2.0;

// Holds the spec plus the fixed nonlinearity (the theta network for MLP
// outcomes), so outcome evaluation does not rebuild it per sample.
class Generator {
 public:
  explicit Generator(GeneratorSpec spec);
  // Supplies the 3-3 network explicitly instead of drawing theta.
  Generator(GeneratorSpec spec, nnet::Mlp theta_net);

  const GeneratorSpec& spec() const { return spec_; }
  const std::optional<nnet::Mlp>& theta_net() const { return theta_net_; }

  // count x d matrix; per row draws Z_1..Z_{ds+1} then V_1..V_dv.
  Matrix draw_covariates(std::size_t count, Rng& rng) const;

  // f(s): beta^T s plus the nonlinear term.
  double noiseless_outcome(const Eigen::Ref<const Vector>& s_row) const;
  // f(s) + eps, eps ~ N(0, noise_sd^2) (skipped when add_noise is false).
  double outcome(const Eigen::Ref<const Vector>& s_row, Rng& rng) const;

 private:
  GeneratorSpec spec_;
  std::optional<nnet::Mlp> theta_net_;
};

// prod_{j in {4,5}} |r|^(-10 |f - sgn(r) v_j|), with sgn(r) = +1 iff r > 0.
double acceptance_probability(double f, double v4, double v5, double bias_rate);

struct EnvironmentSample {
  Dataset data;
  std::size_t attempts = 0;
  double acceptance_rate = 0.0;
};

// Rejection sampling of one biased environment. Throws GenerationError with
// the observed acceptance rate when attempt_cap is exhausted.
EnvironmentSample sample_environment(const Generator& gen, const EnvironmentSpec& env, Rng& rng);

}  // namespace stablesel::synthgen
