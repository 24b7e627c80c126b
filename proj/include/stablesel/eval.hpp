#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stablesel/core.hpp"
#include "stablesel/dwr.hpp"
#include "stablesel/nnet.hpp"
#include "stablesel/rng.hpp"
#include "stablesel/srdo.hpp"

namespace stablesel::eval {

enum class Method { DWR, SRDO, OLS, LASSO, CORR };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

// Scores plus the descending order they induce; ties go to the lower feature
// index. Indices are 0-based; reported ranks are 1-based.
struct FeatureRanking {
  Vector scores;
  std::vector<std::size_t> order;
  std::size_t selected_k = 0;

  // Top-k features, ascending index order.
  std::vector<std::size_t> selected() const { return top(selected_k); }
  std::vector<std::size_t> top(std::size_t k) const;
};

inline constexpr const char* kTieBreakRule = "ascending feature index";

FeatureRanking make_ranking(const Vector& scores, std::size_t k);

// Mean 1-based position of the truth features in the ranking.
double rank_average(const FeatureRanking& ranking, const std::vector<std::size_t>& truth);

// F1 between the top-k features and the truth set.
double selection_f1(const FeatureRanking& ranking, const std::vector<std::size_t>& truth, std::size_t k);

struct RegressorConfig {
  std::vector<std::size_t> hidden = {5, 5};
  double learning_rate = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  bool zero_output_layer = false;  // test hook: start from the constant-zero predictor
};

struct TestEnvironment {
  double bias_rate = 0.0;
  Dataset data;
};

struct RmseReport {
  std::vector<std::pair<double, double>> per_env;  // (r_te, rmse)
  double mean = 0.0;
  double std = 0.0;  // population standard deviation across environments
};

double rmse(const Vector& prediction, const Vector& truth);

// Trains the ReLU MLP regressor on the selected columns of `train` and reports
// RMSE in each test environment. Columns are used in ascending index order.
RmseReport downstream_rmse(const Dataset& train, const std::vector<TestEnvironment>& tests,
                           const std::vector<std::size_t>& selected, Rng& rng, const RegressorConfig& cfg = {});

struct MethodHyper {
  std::vector<double> lasso_alpha = {0.0003, 0.001, 0.01, 0.1};
  std::vector<double> dwr_lambda1 = {0.02, 0.05, 0.1};
  std::vector<double> dwr_lambda2 = {0.02, 0.05, 0.1};
  std::vector<double> srdo_gamma = {5.0, 10.0, 20.0};
  dwr::DwrConfig dwr;    // base settings; the grid overrides lambda1/lambda2
  srdo::SrdoConfig srdo;  // base settings; the grid overrides gamma
  double validation_fraction = 0.2;  // LASSO alpha is chosen on a held-out split
};

struct ScoreResult {
  FeatureRanking ranking;
  std::string chosen;          // e.g. "alpha=0.001", "lambda1=0.02,lambda2=0.1"
  double selection_stat = 0.0;  // the quantity minimized by the selection rule
};

// DWR / SRDO: learn weights, score = |WLS coefficient|. Grid point with the
// smallest max off-diagonal |weighted cov| wins (for SRDO the classifier is
// trained once; gamma only changes the clip).
// OLS / LASSO: |coefficient|; LASSO alpha minimizes held-out MSE.
// CORR: |Pearson correlation with Y|.
ScoreResult score_features(Method method, const Dataset& data, const MethodHyper& hyper, std::size_t k, Rng& rng);

struct EvalReport {
  std::string method;
  double r_train = 0.0;
  std::uint64_t seed = 0;
  double rank_average = 0.0;
  double f1 = 0.0;
  RmseReport rmse;
  std::string chosen;
  std::vector<std::size_t> order;

  static std::string csv_header();  // method,r_tr,seed,rank_average,f1,rmse_mean,rmse_std
  std::string csv_row() const;
  std::string to_json() const;
};

}  // namespace stablesel::eval
