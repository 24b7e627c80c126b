#include "stablesel/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stablesel/error.hpp"

namespace stablesel::synthgen {

namespace {
// Which noise columns carry the spurious correlation: V_4 and V_5.
constexpr std::size_t kBiasedNoise[] = {3, 4};
constexpr std::size_t kMlpInputs = 3;

std::vector<std::string> feature_names(const GeneratorSpec& spec) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < spec.d_s; ++i) names.push_back("S" + std::to_string(i + 1));
  for (std::size_t i = 0; i < spec.d_v; ++i) names.push_back("V" + std::to_string(i + 1));
  return names;
}
}  // namespace

std::string to_string(OutcomeKind kind) { return kind == OutcomeKind::MLP ? "mlp" : "poly"; }

OutcomeKind outcome_kind_from_string(const std::string& name) {
  if (name == "mlp" || name == "MLP") return OutcomeKind::MLP;
  if (name == "poly" || name == "Poly" || name == "POLY") return OutcomeKind::Poly;
  throw ContractError("unknown outcome kind '" + name + "' (expected mlp or poly)");
}

Vector GeneratorSpec::default_beta() {
  Vector b(5);
  b << 1.0 / 3.0, -2.0 / 3.0, 1.0, -1.0 / 3.0, 2.0 / 3.0;
  return b;
}

void GeneratorSpec::validate() const {
  if (d_s < kMlpInputs) throw ContractError("GeneratorSpec: need d_s >= 3 for the nonlinear term");
  if (d_v < 5) throw ContractError("GeneratorSpec: need d_v >= 5 (bias acts on V_4, V_5)");
  if (static_cast<std::size_t>(beta.size()) != d_s) throw DimensionError("GeneratorSpec: beta length != d_s");
  if (!(noise_sd > 0.0)) throw ContractError("GeneratorSpec: noise_sd must be positive");
}

void EnvironmentSpec::validate() const {
  if (!(std::abs(bias_rate) > 1.0)) throw ContractError("EnvironmentSpec: |r| must exceed 1");
  if (n_target < 1) throw ContractError("EnvironmentSpec: n_target must be at least 1");
}

Generator::Generator(GeneratorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.outcome_kind == OutcomeKind::MLP) {
    Rng theta_rng(spec_.mlp_theta_seed);
    theta_net_ = nnet::Mlp::uniform_init({kMlpInputs, 3, 3, 1}, nnet::OutputHead::Linear, -1.0, 1.0, theta_rng);
  }
}

Generator::Generator(GeneratorSpec spec, nnet::Mlp theta_net) : spec_(std::move(spec)), theta_net_(std::move(theta_net)) {
  spec_.validate();
  if (theta_net_->input_size() != kMlpInputs || theta_net_->output_size() != 1) {
    throw DimensionError("Generator: theta network must map 3 inputs to 1 output");
  }
}

Matrix Generator::draw_covariates(std::size_t count, Rng& rng) const {
  if (count < 1) throw ContractError("draw_covariates: count must be positive");
  const std::size_t ds = spec_.d_s;
  Matrix x(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(spec_.d()));
  Vector z(static_cast<Eigen::Index>(ds + 1));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (auto& v : z) v = rng.normal();
    for (std::size_t k = 0; k < ds; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      x(i, kk) = 0.8 * z[kk] + 0.2 * z[kk + 1];
    }
    for (std::size_t k = 0; k < spec_.d_v; ++k) x(i, static_cast<Eigen::Index>(ds + k)) = rng.normal();
  }
  if (spec_.clip) x = x.cwiseMax(-kClipBound).cwiseMin(kClipBound);
  return x;
}

double Generator::noiseless_outcome(const Eigen::Ref<const Vector>& s) const {
  if (static_cast<std::size_t>(s.size()) != spec_.d_s) throw DimensionError("outcome: s length != d_s");
  double f = spec_.beta.dot(s);
  if (spec_.outcome_kind == OutcomeKind::Poly) {
    f += s[0] * s[1] * s[2] / 4.0;
  } else {
    f += theta_net_->forward(s.head(kMlpInputs))[0];
  }
  return f;
}

double Generator::outcome(const Eigen::Ref<const Vector>& s, Rng& rng) const {
  const double f = noiseless_outcome(s);
  return spec_.add_noise ? f + spec_.noise_sd * rng.normal() : f;
}

double acceptance_probability(double f, double v4, double v5, double bias_rate) {
  const double sign = bias_rate > 0.0 ? 1.0 : -1.0;
  const double d4 = std::abs(f - sign * v4);
  const double d5 = std::abs(f - sign * v5);
  return std::pow(std::abs(bias_rate), -10.0 * (d4 + d5));
}

EnvironmentSample sample_environment(const Generator& gen, const EnvironmentSpec& env, Rng& rng) {
  env.validate();
  const auto& spec = gen.spec();
  const std::size_t cap = env.attempt_cap > 0 ? env.attempt_cap : 10000 * env.n_target;
  const auto ds = static_cast<Eigen::Index>(spec.d_s);

  Matrix x(static_cast<Eigen::Index>(env.n_target), static_cast<Eigen::Index>(spec.d()));
  Vector y(static_cast<Eigen::Index>(env.n_target));
  std::size_t accepted = 0;
  std::size_t attempts = 0;
  while (accepted < env.n_target) {
    if (attempts >= cap) {
      const double rate = static_cast<double>(accepted) / static_cast<double>(attempts);
      std::ostringstream msg;
      msg << "sample_environment(r=" << env.bias_rate << "): accepted " << accepted << " of " << env.n_target
          << " after " << attempts << " attempts (acceptance rate " << rate << ")";
      throw GenerationError(msg.str(), rate);
    }
    ++attempts;
    const Matrix cand = gen.draw_covariates(1, rng);
    const Vector row = cand.row(0).transpose();
    const double f = gen.noiseless_outcome(row.head(ds));
    const double p = acceptance_probability(f, row[ds + static_cast<Eigen::Index>(kBiasedNoise[0])],
                                            row[ds + static_cast<Eigen::Index>(kBiasedNoise[1])], env.bias_rate);
    if (rng.uniform() >= p) continue;
    const auto i = static_cast<Eigen::Index>(accepted);
    x.row(i) = row.transpose();
    y[i] = spec.add_noise ? f + spec.noise_sd * rng.normal() : f;
    ++accepted;
  }
  EnvironmentSample out{Dataset(std::move(x), std::move(y), feature_names(spec)), attempts,
                        static_cast<double>(accepted) / static_cast<double>(attempts)};
  return out;
}

}  // namespace stablesel::synthgen
