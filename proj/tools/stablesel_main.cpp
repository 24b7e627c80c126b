// stablesel command-line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stablesel/csv.hpp"
#include "stablesel/dwr.hpp"
#include "stablesel/error.hpp"
#include "stablesel/eval.hpp"
#include "stablesel/experiment.hpp"
#include "stablesel/oracle.hpp"
#include "stablesel/srdo.hpp"

namespace ss = stablesel;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCellFailures = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GridOverrides {
  std::string config_path;
  std::string out;
  std::size_t n = 0;
  std::size_t n_test = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> r_train;
  std::vector<double> r_test;
  std::vector<std::string> methods;
  std::string outcome;
  std::string mode;
  std::size_t top_k = 0;
};

void add_grid_options(CLI::App* cmd, GridOverrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON experiment config");
  cmd->add_option("-o,--out", o.out, "output directory");
  cmd->add_option("--n", o.n, "training sample size");
  cmd->add_option("--n-test", o.n_test, "test sample size per environment");
  cmd->add_option("--seeds", o.seeds, "seed list");
  cmd->add_option("--r-train", o.r_train, "training bias rates")->allow_extra_args();
  cmd->add_option("--r-test", o.r_test, "test bias rates")->allow_extra_args();
  cmd->add_option("--methods", o.methods, "DWR SRDO OLS LASSO CORR");
  cmd->add_option("--outcome", o.outcome, "poly or mlp");
  cmd->add_option("--mode", o.mode, "figure1 or figure2");
  cmd->add_option("--top-k", o.top_k, "number of selected features");
}

ss::experiment::ExperimentConfig load_config(const GridOverrides& o) {
  using ss::experiment::ExperimentConfig;
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::from_file(o.config_path);
  // Round-trip through JSON so flag overrides get the same validation.
  json j = json::parse(c.to_json());
  if (!o.out.empty()) j["output_dir"] = o.out;
  if (o.n) j["n"] = o.n;
  if (o.n_test) j["n_test"] = o.n_test;
  if (!o.seeds.empty()) j["seeds"] = o.seeds;
  if (!o.r_train.empty()) j["r_train"] = o.r_train;
  if (!o.r_test.empty()) j["r_test"] = o.r_test;
  if (!o.methods.empty()) j["methods"] = o.methods;
  if (!o.outcome.empty()) j["generator"]["outcome"] = o.outcome;
  if (!o.mode.empty()) j["mode"] = o.mode;
  if (o.top_k) j["top_k"] = o.top_k;
  return ExperimentConfig::from_json(j.dump());
}

int cmd_gen(const GridOverrides& o) {
  const auto cfg = load_config(o);
  std::vector<double> r_train = cfg.r_train;
  if (cfg.mode == ss::experiment::Mode::Figure2) r_train = {cfg.figure2.r_train};
  const auto data = ss::experiment::generate(cfg, &r_train);
  ss::experiment::write_datasets(cfg, data);
  for (const auto& g : data.train)
    std::cout << "train r=" << ss::format_double(g.bias_rate) << " seed=" << g.seed
              << " acceptance_rate=" << ss::format_double(g.acceptance_rate) << "\n";
  for (const auto& g : data.test_records)
    std::cout << "test r=" << ss::format_double(g.bias_rate) << " seed=" << g.seed
              << " acceptance_rate=" << ss::format_double(g.acceptance_rate) << "\n";
  std::cout << "config_hash " << cfg.hash() << "\n";
  return kExitOk;
}

int cmd_reproduce(const GridOverrides& o) {
  const auto cfg = load_config(o);
  std::vector<double> r_train = cfg.r_train;
  if (cfg.mode == ss::experiment::Mode::Figure2) r_train = {cfg.figure2.r_train};
  const auto data = ss::experiment::generate(cfg, &r_train);
  const auto result = ss::experiment::run(cfg, data);
  ss::experiment::write_outputs(cfg, data, result);
  std::ifstream summary(cfg.output_dir + "/summary.txt");
  std::cout << summary.rdbuf();
  return result.failures() ? kExitCellFailures : kExitOk;
}

struct WeightOptions {
  std::string data;
  std::string out;
  std::string method = "dwr";
  double lambda1 = 0.05;
  double lambda2 = 0.05;
  double gamma = 10.0;
  std::size_t max_iters = 5000;
  std::size_t epochs = 100;
  std::vector<std::size_t> hidden = {30, 10};
  double validation_fraction = 0.0;
  std::uint64_t seed = 0;
};

int cmd_weights(const WeightOptions& o) {
  const auto data = ss::read_dataset_csv(o.data);
  std::optional<ss::WeightVector> w;
  const std::string method = ss::eval::to_string(ss::eval::method_from_string(o.method));
  if (method == "DWR") {
    ss::dwr::DwrConfig cfg;
    cfg.lambda1 = o.lambda1;
    cfg.lambda2 = o.lambda2;
    cfg.max_iters = o.max_iters;
    cfg.validate();
    w = ss::dwr::dwr_fit(data, cfg).weights;
  } else if (method == "SRDO") {
    ss::srdo::SrdoConfig cfg;
    cfg.gamma = o.gamma;
    cfg.epochs = o.epochs;
    cfg.classifier_hidden = o.hidden;
    cfg.validation_fraction = o.validation_fraction;
    cfg.shuffle_seed = o.seed;
    cfg.validate();
    ss::Rng rng(o.seed);
    w = ss::srdo::srdo_fit(data, cfg, rng).weights;
  } else {
    throw ss::ConfigError("weights: method must be dwr or srdo");
  }
  if (!o.out.empty()) ss::write_weights_csv(o.out, *w);
  const auto& v = w->values();
  std::cout << "mean=" << ss::format_double(v.mean()) << " min=" << ss::format_double(v.minCoeff())
            << " max=" << ss::format_double(v.maxCoeff())
            << " max_abs_weighted_cov=" << ss::format_double(ss::max_abs_offdiag_cov(data.features(), v)) << "\n";
  return kExitOk;
}

struct SelectOptions {
  std::string data;
  std::string method = "srdo";
  std::size_t k = 5;
  std::uint64_t seed = 0;
};

json ranking_json(const ss::Dataset& data, const ss::eval::ScoreResult& s) {
  json j;
  std::vector<std::size_t> order1;
  std::vector<std::string> names;
  for (auto i : s.ranking.order) {
    order1.push_back(i + 1);
    names.push_back(data.feature_names()[i]);
  }
  j["order"] = order1;
  j["order_names"] = names;
  j["scores"] = std::vector<double>(s.ranking.scores.data(), s.ranking.scores.data() + s.ranking.scores.size());
  std::vector<std::size_t> sel;
  for (auto i : s.ranking.selected()) sel.push_back(i + 1);
  j["selected"] = sel;
  j["chosen_hyper"] = s.chosen;
  j["tie_break"] = ss::eval::kTieBreakRule;
  return j;
}

int cmd_select(const SelectOptions& o) {
  const auto data = ss::read_dataset_csv(o.data);
  if (o.k < 1 || o.k > data.d()) throw ss::ConfigError("select: k must be in [1, d]");
  const auto method = ss::eval::method_from_string(o.method);
  ss::eval::MethodHyper hyper;
  hyper.srdo.shuffle_seed = o.seed;
  ss::Rng rng(o.seed);
  const auto s = ss::eval::score_features(method, data, hyper, o.k, rng);
  auto j = ranking_json(data, s);
  j["method"] = ss::eval::to_string(method);
  std::cout << j.dump() << "\n";
  return kExitOk;
}

struct EvalOptions {
  std::string train;
  std::vector<std::string> tests;
  std::vector<double> r_te;
  std::string method = "srdo";
  std::size_t k = 5;
  std::vector<std::size_t> truth = {1, 2, 3, 4, 5};
  double r_tr = 0.0;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalOptions& o) {
  if (o.tests.empty()) throw ss::ConfigError("eval: at least one --test file is required");
  if (!o.r_te.empty() && o.r_te.size() != o.tests.size())
    throw ss::ConfigError("eval: --r-te needs one value per --test file");
  const auto train = ss::read_dataset_csv(o.train);
  if (o.k < 1 || o.k > train.d()) throw ss::ConfigError("eval: k must be in [1, d]");
  std::vector<std::size_t> truth;
  for (auto t : o.truth) {
    if (t < 1 || t > train.d()) throw ss::ConfigError("eval: truth indices are 1-based and must be in [1, d]");
    truth.push_back(t - 1);
  }
  std::vector<ss::eval::TestEnvironment> tests;
  for (std::size_t i = 0; i < o.tests.size(); ++i)
    tests.push_back({o.r_te.empty() ? static_cast<double>(i) : o.r_te[i], ss::read_dataset_csv(o.tests[i])});

  const auto method = ss::eval::method_from_string(o.method);
  ss::eval::MethodHyper hyper;
  hyper.srdo.shuffle_seed = o.seed;
  ss::Rng rng(o.seed);
  const auto s = ss::eval::score_features(method, train, hyper, o.k, rng);
  ss::eval::EvalReport report;
  report.method = ss::eval::to_string(method);
  report.r_train = o.r_tr;
  report.seed = o.seed;
  report.rank_average = ss::eval::rank_average(s.ranking, truth);
  report.f1 = ss::eval::selection_f1(s.ranking, truth, o.k);
  report.chosen = s.chosen;
  report.order = s.ranking.order;
  ss::Rng reg = ss::Rng(o.seed).fork(1);
  report.rmse = ss::eval::downstream_rmse(train, tests, s.ranking.top(o.k), reg);
  std::cout << ss::eval::EvalReport::csv_header() << "\n" << report.csv_row() << "\n" << report.to_json() << "\n";
  return kExitOk;
}

struct OracleOptions {
  std::size_t instances = 100;
  std::uint64_t seed = 0;
  std::string joint;
};

int cmd_oracle_verify(const OracleOptions& o) {
  namespace orc = ss::oracle;
  if (!o.joint.empty()) {
    std::ifstream in(o.joint);
    if (!in) throw ss::ConfigError("cannot open " + o.joint);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto joint = orc::DiscreteJoint::from_json(buf.str());
    std::cout << "stable sets:";
    for (const auto& s : orc::stable_sets(joint)) std::cout << " " << orc::format_set(s);
    std::cout << "\nminimal stable set: " << orc::format_set(orc::minimal_stable_set(joint)) << "\n";
    std::cout << "markov boundary: " << orc::format_set(orc::markov_boundary(joint)) << "\n";
    return kExitOk;
  }
  const auto r = orc::run_theorem_suite(o.instances, o.seed);
  std::cout << "instances " << r.instances << "\n"
            << "lattice " << r.lattice_ok << "/" << r.instances << "\n"
            << "inclusion " << r.inclusion_ok << "/" << r.instances << "\n"
            << "zero_coefficients " << r.zero_coef_ok << "/" << r.instances
            << " (max " << ss::format_double(r.max_outside_coef) << ")\n"
            << "invariance " << r.invariance_ok << "/" << r.instances << "\n"
            << "nonzero " << r.nonzero_ok << "/" << r.nonzero_checked << " (skipped " << r.nonzero_skipped << ")\n"
            << "planted_match " << r.planted_match << "/" << r.instances << "\n";
  for (const auto& f : r.failures) std::cout << "failure: " << f << "\n";
  const auto ex = orc::heteroskedastic_example();
  std::cout << "heteroskedastic example: minimal stable set " << orc::format_set(orc::minimal_stable_set(ex))
            << ", markov boundary " << orc::format_set(orc::markov_boundary(ex)) << "\n";
  std::cout << (r.passed() ? "PASS" : "FAIL") << "\n";
  return r.passed() ? kExitOk : kExitCellFailures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable feature selection by independence-driven sample reweighting"};
  app.require_subcommand(1);

  GridOverrides gen_opts, rep_opts;
  auto* gen = app.add_subcommand("gen", "generate synthetic environments");
  add_grid_options(gen, gen_opts);
  auto* rep = app.add_subcommand("reproduce", "run the evaluation grid and emit plot data");
  add_grid_options(rep, rep_opts);

  WeightOptions w;
  auto* weights = app.add_subcommand("weights", "learn sample weights for a dataset");
  weights->add_option("--data", w.data, "dataset CSV")->required();
  weights->add_option("--out", w.out, "weights CSV");
  weights->add_option("--method", w.method, "dwr or srdo");
  weights->add_option("--lambda1", w.lambda1, "DWR sum penalty");
  weights->add_option("--lambda2", w.lambda2, "DWR magnitude penalty");
  weights->add_option("--gamma", w.gamma, "SRDO clip bound");
  weights->add_option("--max-iters", w.max_iters, "DWR Adam steps");
  weights->add_option("--epochs", w.epochs, "SRDO classifier epochs");
  weights->add_option("--hidden", w.hidden, "SRDO classifier hidden sizes")->expected(1, 8);
  weights->add_option("--validation-fraction", w.validation_fraction, "SRDO held-out share for early stopping (0: off)");
  weights->add_option("--seed", w.seed);

  SelectOptions s;
  auto* select = app.add_subcommand("select", "rank features of a dataset");
  select->add_option("--data", s.data, "dataset CSV")->required();
  select->add_option("--method", s.method, "DWR SRDO OLS LASSO CORR");
  select->add_option("--k", s.k);
  select->add_option("--seed", s.seed);

  EvalOptions e;
  auto* ev = app.add_subcommand("eval", "score, select and evaluate on test environments");
  ev->add_option("--train", e.train, "training CSV")->required();
  ev->add_option("--test", e.tests, "test CSV (repeatable)");
  ev->add_option("--r-te", e.r_te, "bias rate per test file")->allow_extra_args();
  ev->add_option("--r-tr", e.r_tr, "training bias rate (reported only)");
  ev->add_option("--method", e.method);
  ev->add_option("--k", e.k);
  ev->add_option("--truth", e.truth, "1-based stable feature indices");
  ev->add_option("--seed", e.seed);

  OracleOptions orc;
  auto* oracle = app.add_subcommand("oracle-verify", "check the population-level theory on discrete joints");
  oracle->add_option("--instances", orc.instances);
  oracle->add_option("--seed", orc.seed);
  oracle->add_option("--joint", orc.joint, "JSON joint to analyse instead of the random suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(gen_opts);
    if (*rep) return cmd_reproduce(rep_opts);
    if (*weights) return cmd_weights(w);
    if (*select) return cmd_select(s);
    if (*ev) return cmd_eval(e);
    if (*oracle) return cmd_oracle_verify(orc);
  } catch (const ss::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const ss::ContractError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const ss::ParseError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
