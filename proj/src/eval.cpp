#include "stablesel/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "stablesel/csv.hpp"
#include "stablesel/error.hpp"
#include "stablesel/regress.hpp"

namespace stablesel::eval {

std::string to_string(Method m) {
  switch (m) {
    case Method::DWR: return "DWR";
    case Method::SRDO: return "SRDO";
    case Method::OLS: return "OLS";
    case Method::LASSO: return "LASSO";
    case Method::CORR: return "CORR";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (up == "DWR") return Method::DWR;
  if (up == "SRDO") return Method::SRDO;
  if (up == "OLS") return Method::OLS;
  if (up == "LASSO") return Method::LASSO;
  if (up == "CORR" || up == "CORRELATION") return Method::CORR;
  throw ContractError("unknown method '" + name + "'");
}

std::vector<std::size_t> FeatureRanking::top(std::size_t k) const {
  k = std::min(k, order.size());
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
  return out;
}

FeatureRanking make_ranking(const Vector& scores, std::size_t k) {
  FeatureRanking r{scores, std::vector<std::size_t>(static_cast<std::size_t>(scores.size())), k};
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
  });
  return r;
}

double rank_average(const FeatureRanking& ranking, const std::vector<std::size_t>& truth) {
  if (truth.empty()) throw ContractError("rank_average: empty truth set");
  double total = 0.0;
  for (auto t : truth) {
    const auto it = std::find(ranking.order.begin(), ranking.order.end(), t);
    if (it == ranking.order.end()) throw DimensionError("rank_average: truth index not in ranking");
    total += static_cast<double>(it - ranking.order.begin() + 1);
  }
  return total / static_cast<double>(truth.size());
}

double selection_f1(const FeatureRanking& ranking, const std::vector<std::size_t>& truth, std::size_t k) {
  if (k < 1) throw ContractError("selection_f1: k must be positive");
  if (truth.empty()) throw ContractError("selection_f1: empty truth set");
  const auto chosen = ranking.top(k);
  std::size_t overlap = 0;
  for (auto c : chosen) overlap += static_cast<std::size_t>(std::count(truth.begin(), truth.end(), c));
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(chosen.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(truth.size());
  return 2.0 * precision * recall / (precision + recall);
}

double rmse(const Vector& prediction, const Vector& truth) {
  if (prediction.size() != truth.size()) throw DimensionError("rmse: length mismatch");
  return std::sqrt((prediction - truth).squaredNorm() / static_cast<double>(truth.size()));
}

RmseReport downstream_rmse(const Dataset& train, const std::vector<TestEnvironment>& tests,
                           const std::vector<std::size_t>& selected, Rng& rng, const RegressorConfig& cfg) {
  if (selected.empty()) throw ContractError("downstream_rmse: no features selected");
  if (tests.empty()) throw ContractError("downstream_rmse: no test environments");
  std::vector<std::size_t> cols = selected;
  std::sort(cols.begin(), cols.end());
  const Dataset sub = train.select_columns(cols);

  std::vector<std::size_t> sizes{cols.size()};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);
  auto net = nnet::Mlp::fan_in_init(sizes, nnet::OutputHead::Linear, rng);
  if (cfg.zero_output_layer) {
    net.weight(net.num_layers() - 1).setZero();
    net.bias(net.num_layers() - 1).setZero();
  }
  nnet::AdamState adam(net, cfg.learning_rate);
  nnet::train(net, sub.features(), sub.outcome(), nnet::Loss::MSE, adam, cfg.epochs, cfg.batch_size, rng);

  RmseReport report;
  for (const auto& env : tests) {
    const Dataset te = env.data.select_columns(cols);
    const Vector pred = net.forward_batch(te.features()).col(0);
    report.per_env.emplace_back(env.bias_rate, rmse(pred, te.outcome()));
  }
  double sum = 0.0;
  for (const auto& [r, e] : report.per_env) sum += e;
  report.mean = sum / static_cast<double>(report.per_env.size());
  double var = 0.0;
  for (const auto& [r, e] : report.per_env) var += (e - report.mean) * (e - report.mean);
  report.std = std::sqrt(var / static_cast<double>(report.per_env.size()));
  return report;
}

namespace {

Vector abs_coefficients(const regress::Coefficients& c) { return c.beta.cwiseAbs(); }

ScoreResult score_lasso(const Dataset& data, const MethodHyper& hyper, std::size_t k, Rng& rng) {
  if (hyper.lasso_alpha.empty()) throw ConfigError("LASSO: empty alpha grid");
  const auto perm = rng.permutation(data.n());
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(hyper.validation_fraction * static_cast<double>(data.n())));
  std::vector<std::size_t> val(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> fit(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(val.begin(), val.end());
  std::sort(fit.begin(), fit.end());
  const Dataset fit_data = data.select_rows(fit);
  const Dataset val_data = data.select_rows(val);

  double best_alpha = hyper.lasso_alpha.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double alpha : hyper.lasso_alpha) {
    const auto c = regress::lasso(fit_data, alpha);
    const double err = (c.predict(val_data.features()) - val_data.outcome()).squaredNorm() / static_cast<double>(val.size());
    if (err < best_err) {
      best_err = err;
      best_alpha = alpha;
    }
  }
  const auto c = regress::lasso(data, best_alpha);
  return ScoreResult{make_ranking(abs_coefficients(c), k), "alpha=" + format_double(best_alpha), best_err};
}

ScoreResult score_dwr(const Dataset& data, const MethodHyper& hyper, std::size_t k) {
  if (hyper.dwr_lambda1.empty() || hyper.dwr_lambda2.empty()) throw ConfigError("DWR: empty lambda grid");
  std::optional<dwr::DwrFit> best;
  std::string chosen;
  for (double l1 : hyper.dwr_lambda1) {
    for (double l2 : hyper.dwr_lambda2) {
      dwr::DwrConfig cfg = hyper.dwr;
      cfg.lambda1 = l1;
      cfg.lambda2 = l2;
      auto fit = dwr::dwr_fit(data, cfg);
      if (!best || fit.max_abs_cov < best->max_abs_cov) {
        chosen = "lambda1=" + format_double(l1) + ",lambda2=" + format_double(l2);
        best = std::move(fit);
      }
    }
  }
  const auto c = regress::wls(data, best->weights);
  return ScoreResult{make_ranking(abs_coefficients(c), k), chosen, best->max_abs_cov};
}

ScoreResult score_srdo(const Dataset& data, const MethodHyper& hyper, std::size_t k, Rng& rng) {
  if (hyper.srdo_gamma.empty()) throw ConfigError("SRDO: empty gamma grid");
  srdo::SrdoConfig cfg = hyper.srdo;
  cfg.gamma = hyper.srdo_gamma.front();
  const auto fit = srdo::srdo_fit(data, cfg, rng);
  double best_stat = std::numeric_limits<double>::infinity();
  std::optional<WeightVector> best;
  std::string chosen;
  for (double gamma : hyper.srdo_gamma) {
    WeightVector w = srdo::clip_and_normalize(fit.odds, gamma);
    const double stat = max_abs_offdiag_cov(data.features(), w.values());
    if (stat < best_stat) {
      best_stat = stat;
      best = std::move(w);
      chosen = "gamma=" + format_double(gamma);
    }
  }
  const auto c = regress::wls(data, *best);
  return ScoreResult{make_ranking(abs_coefficients(c), k), chosen, best_stat};
}

}  // namespace

ScoreResult score_features(Method method, const Dataset& data, const MethodHyper& hyper, std::size_t k, Rng& rng) {
  switch (method) {
    case Method::OLS:
      return ScoreResult{make_ranking(abs_coefficients(regress::ols(data)), k), "", 0.0};
    case Method::LASSO:
      return score_lasso(data, hyper, k, rng);
    case Method::CORR: {
      Vector s(static_cast<Eigen::Index>(data.d()));
      for (Eigen::Index j = 0; j < s.size(); ++j) s[j] = std::abs(pearson(data.features().col(j), data.outcome()));
      return ScoreResult{make_ranking(s, k), "", 0.0};
    }
    case Method::DWR:
      return score_dwr(data, hyper, k);
    case Method::SRDO:
      return score_srdo(data, hyper, k, rng);
  }
  throw ContractError("score_features: unknown method");
}

std::string EvalReport::csv_header() { return "method,r_tr,seed,rank_average,f1,rmse_mean,rmse_std"; }

std::string EvalReport::csv_row() const {
  std::ostringstream out;
  out << method << ',' << format_double(r_train) << ',' << seed << ',' << format_double(rank_average) << ','
      << format_double(f1) << ',' << format_double(rmse.mean) << ',' << format_double(rmse.std);
  return out.str();
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["r_tr"] = r_train;
  j["seed"] = seed;
  j["rank_average"] = rank_average;
  j["f1"] = f1;
  j["rmse_mean"] = rmse.mean;
  j["rmse_std"] = rmse.std;
  auto& envs = j["rmse_per_env"];
  envs = nlohmann::json::array();
  for (const auto& [r, e] : rmse.per_env) envs.push_back({{"r_te", r}, {"rmse", e}});
  std::vector<std::size_t> ranks;
  for (auto o : order) ranks.push_back(o + 1);
  j["order"] = ranks;
  j["chosen_hyper"] = chosen;
  j["tie_break"] = kTieBreakRule;
  return j.dump();
}

}  // namespace stablesel::eval
