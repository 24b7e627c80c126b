#include "stablesel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "stablesel/csv.hpp"
#include "stablesel/error.hpp"

namespace stablesel::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::uint64_t tag(const std::string& s) { return fnv1a64(s.data(), s.size()); }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string mode_name(Mode m) { return m == Mode::Figure1 ? "figure1" : "figure2"; }

Mode mode_from_string(const std::string& s) {
  if (s == "figure1") return Mode::Figure1;
  if (s == "figure2") return Mode::Figure2;
  throw ConfigError("mode must be figure1 or figure2, got '" + s + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::vector<std::size_t> ExperimentConfig::truth() const {
  std::vector<std::size_t> t(generator.d_s);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = i;
  return t;
}

void ExperimentConfig::validate() const {
  try {
    generator.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("generator: ") + e.what());
  }
  auto check_rates = [](const std::vector<double>& rs, const char* what) {
    for (double r : rs) {
      if (!(std::abs(r) > 1.0) || !std::isfinite(r)) throw ConfigError(std::string(what) + ": every r needs |r| > 1");
    }
  };
  check_rates(r_train, "r_train");
  check_rates(r_test, "r_test");
  if (r_test.empty()) throw ConfigError("r_test is empty");
  if (mode == Mode::Figure1 && r_train.empty()) throw ConfigError("r_train is empty");
  if (seeds.empty()) throw ConfigError("seeds is empty");
  if (n < 10) throw ConfigError("n must be at least 10");
  if (mode == Mode::Figure1 && methods.empty()) throw ConfigError("methods is empty");
  if (top_k < 1 || top_k > generator.d()) throw ConfigError("top_k must be in [1, d]");
  if (figure2.max_k < 1 || figure2.max_k > generator.d()) throw ConfigError("figure2.max_k must be in [1, d]");
  if (mode == Mode::Figure2 && !(std::abs(figure2.r_train) > 1.0)) throw ConfigError("figure2.r_train needs |r| > 1");
  if (regressor.epochs < 1 || regressor.batch_size < 1) throw ConfigError("regressor epochs and batch_size must be positive");
  if (!(hyper.validation_fraction > 0.0 && hyper.validation_fraction < 1.0))
    throw ConfigError("hyper.validation_fraction must be in (0, 1)");
  try {
    hyper.dwr.validate();
    hyper.srdo.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("hyper: ") + e.what());
  }
  for (double a : hyper.lasso_alpha)
    if (!(a > 0)) throw ConfigError("lasso alpha must be positive");
  for (double g : hyper.srdo_gamma)
    if (!(g > 1)) throw ConfigError("srdo gamma must exceed 1");
  for (double l : hyper.dwr_lambda1)
    if (!(l >= 0)) throw ConfigError("dwr lambda1 must be non-negative");
  for (double l : hyper.dwr_lambda2)
    if (!(l >= 0)) throw ConfigError("dwr lambda2 must be non-negative");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"generator", "r_train", "r_test", "n", "n_test", "methods", "hyper", "regressor", "seeds", "top_k",
              "output_dir", "mode", "figure2"},
             "config");
  ExperimentConfig c;
  if (j.contains("generator")) {
    const auto& g = j["generator"];
    check_keys(g, {"d_s", "d_v", "beta", "noise_sd", "outcome", "mlp_theta_seed"}, "generator");
    read_into(g, "d_s", c.generator.d_s);
    read_into(g, "d_v", c.generator.d_v);
    read_into(g, "noise_sd", c.generator.noise_sd);
    read_into(g, "mlp_theta_seed", c.generator.mlp_theta_seed);
    if (g.contains("outcome")) {
      try {
        c.generator.outcome_kind = synthgen::outcome_kind_from_string(g["outcome"].get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("generator.outcome: ") + e.what());
      }
    }
    if (g.contains("beta")) {
      std::vector<double> b;
      read_into(g, "beta", b);
      c.generator.beta = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
    }
  }
  read_into(j, "r_train", c.r_train);
  read_into(j, "r_test", c.r_test);
  read_into(j, "n", c.n);
  read_into(j, "n_test", c.n_test);
  read_into(j, "seeds", c.seeds);
  read_into(j, "top_k", c.top_k);
  read_into(j, "output_dir", c.output_dir);
  if (j.contains("mode")) c.mode = mode_from_string(j["mode"].get<std::string>());
  if (j.contains("methods")) {
    std::vector<std::string> names;
    read_into(j, "methods", names);
    c.methods.clear();
    for (const auto& name : names) {
      try {
        c.methods.push_back(eval::method_from_string(name));
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (j.contains("hyper")) {
    const auto& h = j["hyper"];
    check_keys(h,
               {"lasso_alpha", "dwr_lambda1", "dwr_lambda2", "srdo_gamma", "dwr_learning_rate", "dwr_max_iters",
                "dwr_grad_tol", "srdo_learning_rate", "srdo_epochs", "srdo_batch_size", "srdo_hidden",
                "srdo_validation_fraction", "srdo_patience", "validation_fraction"},
               "hyper");
    read_into(h, "lasso_alpha", c.hyper.lasso_alpha);
    read_into(h, "dwr_lambda1", c.hyper.dwr_lambda1);
    read_into(h, "dwr_lambda2", c.hyper.dwr_lambda2);
    read_into(h, "srdo_gamma", c.hyper.srdo_gamma);
    read_into(h, "dwr_learning_rate", c.hyper.dwr.learning_rate);
    read_into(h, "dwr_max_iters", c.hyper.dwr.max_iters);
    read_into(h, "dwr_grad_tol", c.hyper.dwr.grad_tol);
    read_into(h, "srdo_learning_rate", c.hyper.srdo.learning_rate);
    read_into(h, "srdo_epochs", c.hyper.srdo.epochs);
    read_into(h, "srdo_batch_size", c.hyper.srdo.batch_size);
    read_into(h, "srdo_hidden", c.hyper.srdo.classifier_hidden);
    read_into(h, "srdo_validation_fraction", c.hyper.srdo.validation_fraction);
    read_into(h, "srdo_patience", c.hyper.srdo.patience);
    read_into(h, "validation_fraction", c.hyper.validation_fraction);
  }
  if (j.contains("regressor")) {
    const auto& r = j["regressor"];
    check_keys(r, {"hidden", "learning_rate", "epochs", "batch_size"}, "regressor");
    read_into(r, "hidden", c.regressor.hidden);
    read_into(r, "learning_rate", c.regressor.learning_rate);
    read_into(r, "epochs", c.regressor.epochs);
    read_into(r, "batch_size", c.regressor.batch_size);
  }
  if (j.contains("figure2")) {
    const auto& f = j["figure2"];
    check_keys(f, {"r_train", "method", "max_k"}, "figure2");
    read_into(f, "r_train", c.figure2.r_train);
    read_into(f, "max_k", c.figure2.max_k);
    if (f.contains("method")) c.figure2.method = eval::method_from_string(f["method"].get<std::string>());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["generator"] = {{"d_s", generator.d_s},
                    {"d_v", generator.d_v},
                    {"beta", std::vector<double>(generator.beta.data(), generator.beta.data() + generator.beta.size())},
                    {"noise_sd", generator.noise_sd},
                    {"outcome", synthgen::to_string(generator.outcome_kind)},
                    {"mlp_theta_seed", generator.mlp_theta_seed}};
  j["r_train"] = r_train;
  j["r_test"] = r_test;
  j["n"] = n;
  j["n_test"] = n_test;
  std::vector<std::string> names;
  for (auto m : methods) names.push_back(eval::to_string(m));
  j["methods"] = names;
  j["hyper"] = {{"lasso_alpha", hyper.lasso_alpha},
                {"dwr_lambda1", hyper.dwr_lambda1},
                {"dwr_lambda2", hyper.dwr_lambda2},
                {"srdo_gamma", hyper.srdo_gamma},
                {"dwr_learning_rate", hyper.dwr.learning_rate},
                {"dwr_max_iters", hyper.dwr.max_iters},
                {"dwr_grad_tol", hyper.dwr.grad_tol},
                {"srdo_learning_rate", hyper.srdo.learning_rate},
                {"srdo_epochs", hyper.srdo.epochs},
                {"srdo_batch_size", hyper.srdo.batch_size},
                {"srdo_hidden", hyper.srdo.classifier_hidden},
                {"srdo_validation_fraction", hyper.srdo.validation_fraction},
                {"srdo_patience", hyper.srdo.patience},
                {"validation_fraction", hyper.validation_fraction}};
  j["regressor"] = {{"hidden", regressor.hidden},
                    {"learning_rate", regressor.learning_rate},
                    {"epochs", regressor.epochs},
                    {"batch_size", regressor.batch_size}};
  j["seeds"] = seeds;
  j["top_k"] = top_k;
  j["output_dir"] = output_dir;
  j["mode"] = mode_name(mode);
  j["figure2"] = {{"r_train", figure2.r_train}, {"method", eval::to_string(figure2.method)}, {"max_k", figure2.max_k}};
  return j.dump();
}

std::string ExperimentConfig::hash() const {
  // output_dir does not change any numeric result, so it is left out.
  json j = json::parse(to_json());
  j.erase("output_dir");
  const std::string canonical = j.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(tag(canonical)));
  return buf;
}

Rng dataset_rng(std::uint64_t seed, const std::string& role, double r) {
  return Rng(seed).fork(tag(role + ":" + format_double(r)));
}

const Dataset& GeneratedData::train_for(std::uint64_t seed, double r) const {
  for (const auto& g : train) {
    if (g.seed == seed && g.bias_rate == r) return g.data;
  }
  throw ContractError("no training environment for seed " + std::to_string(seed) + ", r " + format_double(r));
}

GeneratedData generate(const ExperimentConfig& cfg, const std::vector<double>* r_train_subset) {
  const synthgen::Generator gen(cfg.generator);
  const auto& r_train = r_train_subset ? *r_train_subset : cfg.r_train;

  struct Job {
    std::string role;
    double r;
    std::uint64_t seed;
    std::size_t n;
  };
  std::vector<Job> jobs;
  for (auto seed : cfg.seeds) {
    for (double r : r_train) jobs.push_back({"train", r, seed, cfg.n});
    for (double r : cfg.r_test) jobs.push_back({"test", r, seed, cfg.test_size()});
  }
  std::vector<std::optional<GeneratedEnvironment>> out(jobs.size());
  std::vector<std::string> errors(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      try {
        Rng rng = dataset_rng(job.seed, job.role, job.r);
        synthgen::EnvironmentSpec env{job.r, job.n, 0};
        auto s = synthgen::sample_environment(gen, env, rng);
        out[i] = GeneratedEnvironment{job.role, job.r, job.seed, s.attempts, s.acceptance_rate, std::move(s.data)};
      } catch (const std::exception& e) {
        errors[i] = job.role + " r=" + format_double(job.r) + " seed=" + std::to_string(job.seed) + ": " + e.what();
      }
    }
  };
  const std::size_t threads = std::min(worker_count(), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& e : errors) {
    if (!e.empty()) throw GenerationError("dataset generation failed: " + e, 0.0);
  }
  GeneratedData data;
  for (auto& g : out) {
    if (g->role == "train") {
      data.train.push_back(std::move(*g));
    } else {
      data.tests[g->seed].push_back(eval::TestEnvironment{g->bias_rate, g->data});
      data.test_records.push_back(std::move(*g));
    }
  }
  return data;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("STABLESEL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t RunResult::failures() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return c.failed; }));
}

namespace {

eval::MethodHyper cell_hyper(const ExperimentConfig& cfg, std::uint64_t seed, double r) {
  eval::MethodHyper h = cfg.hyper;
  h.srdo.shuffle_seed = Rng(seed).fork(tag("shuffle:" + format_double(r))).next_u64();
  return h;
}

Rng method_rng(std::uint64_t seed, eval::Method m, double r) {
  return Rng(seed).fork(tag("method:" + eval::to_string(m) + ":" + format_double(r)));
}

// Same stream for every method at a given (seed, r_tr), so identical
// selections get identical regressors.
Rng regressor_rng(std::uint64_t seed, double r) { return Rng(seed).fork(tag("regressor:" + format_double(r))); }

std::vector<CellResult> figure1_cell(const ExperimentConfig& cfg, const GeneratedData& data, eval::Method m,
                                     double r, std::uint64_t seed) {
  CellResult cell;
  cell.report.method = eval::to_string(m);
  cell.report.r_train = r;
  cell.report.seed = seed;
  cell.k = cfg.top_k;
  try {
    const Dataset& train = data.train_for(seed, r);
    Rng rng = method_rng(seed, m, r);
    const auto scored = eval::score_features(m, train, cell_hyper(cfg, seed, r), cfg.top_k, rng);
    const auto truth = cfg.truth();
    cell.report.rank_average = eval::rank_average(scored.ranking, truth);
    cell.report.f1 = eval::selection_f1(scored.ranking, truth, cfg.top_k);
    cell.report.chosen = scored.chosen;
    cell.report.order = scored.ranking.order;
    Rng reg = regressor_rng(seed, r);
    cell.report.rmse = eval::downstream_rmse(train, data.tests.at(seed), scored.ranking.top(cfg.top_k), reg, cfg.regressor);
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  return {cell};
}

std::vector<CellResult> figure2_cell(const ExperimentConfig& cfg, const GeneratedData& data, std::uint64_t seed) {
  const double r = cfg.figure2.r_train;
  const eval::Method m = cfg.figure2.method;
  std::vector<CellResult> cells;
  try {
    const Dataset& train = data.train_for(seed, r);
    Rng rng = method_rng(seed, m, r);
    const auto scored = eval::score_features(m, train, cell_hyper(cfg, seed, r), cfg.top_k, rng);
    const auto truth = cfg.truth();
    for (std::size_t k = 1; k <= cfg.figure2.max_k; ++k) {
      CellResult cell;
      cell.report.method = eval::to_string(m);
      cell.report.r_train = r;
      cell.report.seed = seed;
      cell.k = k;
      cell.report.chosen = scored.chosen;
      cell.report.order = scored.ranking.order;
      cell.report.rank_average = eval::rank_average(scored.ranking, truth);
      cell.report.f1 = eval::selection_f1(scored.ranking, truth, k);
      try {
        Rng reg = regressor_rng(seed, r);
        cell.report.rmse = eval::downstream_rmse(train, data.tests.at(seed), scored.ranking.top(k), reg, cfg.regressor);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  } catch (const std::exception& e) {
    CellResult cell;
    cell.report.method = eval::to_string(m);
    cell.report.r_train = r;
    cell.report.seed = seed;
    cell.failed = true;
    cell.error = e.what();
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg, const GeneratedData& data) {
  std::vector<std::function<std::vector<CellResult>()>> tasks;
  if (cfg.mode == Mode::Figure1) {
    for (double r : cfg.r_train)
      for (auto seed : cfg.seeds)
        for (auto m : cfg.methods) tasks.emplace_back([&, m, r, seed] { return figure1_cell(cfg, data, m, r, seed); });
  } else {
    for (auto seed : cfg.seeds) tasks.emplace_back([&, seed] { return figure2_cell(cfg, data, seed); });
  }

  std::vector<std::vector<CellResult>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) slots[i] = tasks[i]();
  };
  const std::size_t threads = std::min(worker_count(), tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RunResult result;
  result.hash = cfg.hash();
  for (auto& s : slots)
    for (auto& c : s) result.cells.push_back(std::move(c));
  return result;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

namespace {

using Metric = double (*)(const CellResult&);

double metric_f1(const CellResult& c) { return c.report.f1; }
double metric_rank(const CellResult& c) { return c.report.rank_average; }
double metric_rmse_mean(const CellResult& c) { return c.report.rmse.mean; }
double metric_rmse_std(const CellResult& c) { return c.report.rmse.std; }

double cell_median(const RunResult& res, const std::string& method, double r, std::size_t k, Metric metric) {
  std::vector<double> v;
  for (const auto& c : res.cells) {
    if (!c.failed && c.report.method == method && c.report.r_train == r && c.k == k) v.push_back(metric(c));
  }
  return median(v);
}

bool has_method(const ExperimentConfig& cfg, eval::Method m) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

}  // namespace

std::vector<CriterionCheck> figure1_checks(const ExperimentConfig& cfg, const RunResult& res) {
  std::vector<CriterionCheck> checks;
  if (!has_method(cfg, eval::Method::OLS)) return checks;
  for (auto m : {eval::Method::SRDO, eval::Method::DWR}) {
    if (!has_method(cfg, m)) continue;
    const std::string name = eval::to_string(m);
    CriterionCheck f1{"F1 " + name + " >= OLS (strict at r_tr >= 2.5)", true, ""};
    CriterionCheck rank{"rank average " + name + " <= OLS", true, ""};
    CriterionCheck sd{"RMSE std " + name + " <= OLS at r_tr >= 2.5", true, ""};
    for (double r : cfg.r_train) {
      const double a = cell_median(res, name, r, cfg.top_k, metric_f1);
      const double b = cell_median(res, "OLS", r, cfg.top_k, metric_f1);
      const bool strict = r >= 2.5;
      const bool ok = strict ? a > b : a >= b;
      f1.passed = f1.passed && ok;
      f1.detail += "r=" + format_double(r) + ":" + format_double(a) + (strict ? " vs " : "/") + format_double(b) + " ";

      const double ra = cell_median(res, name, r, cfg.top_k, metric_rank);
      const double rb = cell_median(res, "OLS", r, cfg.top_k, metric_rank);
      rank.passed = rank.passed && ra <= rb;
      rank.detail += "r=" + format_double(r) + ":" + format_double(ra) + "/" + format_double(rb) + " ";

      if (r >= 2.5) {
        const double sa = cell_median(res, name, r, cfg.top_k, metric_rmse_std);
        const double sb = cell_median(res, "OLS", r, cfg.top_k, metric_rmse_std);
        sd.passed = sd.passed && sa <= sb;
        sd.detail += "r=" + format_double(r) + ":" + format_double(sa) + "/" + format_double(sb) + " ";
      }
    }
    checks.push_back(std::move(f1));
    checks.push_back(std::move(rank));
    checks.push_back(std::move(sd));
  }
  return checks;
}

std::vector<CriterionCheck> figure2_checks(const ExperimentConfig& cfg, const RunResult& res) {
  const std::string name = eval::to_string(cfg.figure2.method);
  const double r = cfg.figure2.r_train;
  const std::size_t small = cfg.generator.d_s;
  const std::size_t all = cfg.figure2.max_k;
  const double m5 = cell_median(res, name, r, small, metric_rmse_mean);
  const double m10 = cell_median(res, name, r, all, metric_rmse_mean);
  const double s5 = cell_median(res, name, r, small, metric_rmse_std);
  const double s10 = cell_median(res, name, r, all, metric_rmse_std);
  const std::string ks = "k=" + std::to_string(small) + " vs k=" + std::to_string(all) + ": ";
  return {
      {"RMSE mean at stable-set size <= all features", m5 <= m10, ks + format_double(m5) + " / " + format_double(m10)},
      {"RMSE std at stable-set size <= all features", s5 <= s10, ks + format_double(s5) + " / " + format_double(s10)},
  };
}

std::string dataset_file_name(const std::string& role, double r, std::uint64_t seed) {
  return role + "_r" + format_double(r) + "_seed" + std::to_string(seed) + ".csv";
}

namespace {

json dataset_records(const GeneratedData& data) {
  json arr = json::array();
  auto add = [&](const GeneratedEnvironment& g) {
    arr.push_back({{"role", g.role},
                   {"r", g.bias_rate},
                   {"seed", g.seed},
                   {"n", g.data.n()},
                   {"attempts", g.attempts},
                   {"acceptance_rate", g.acceptance_rate},
                   {"file", dataset_file_name(g.role, g.bias_rate, g.seed)}});
  };
  for (const auto& g : data.train) add(g);
  for (const auto& g : data.test_records) add(g);
  return arr;
}

}  // namespace

void write_datasets(const ExperimentConfig& cfg, const GeneratedData& data) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  for (const auto& g : data.train) write_dataset_csv((dir / dataset_file_name("train", g.bias_rate, g.seed)).string(), g.data);
  for (const auto& g : data.test_records)
    write_dataset_csv((dir / dataset_file_name("test", g.bias_rate, g.seed)).string(), g.data);
  json manifest;
  manifest["config"] = json::parse(cfg.to_json());
  manifest["config_hash"] = cfg.hash();
  manifest["datasets"] = dataset_records(data);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_outputs(const ExperimentConfig& cfg, const GeneratedData& data, const RunResult& res) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const std::string& h = res.hash;

  std::ostringstream csv, jsonl, failures;
  csv << eval::EvalReport::csv_header() << ",k,config_hash\n";
  failures << "method,r_tr,seed,k,error,config_hash\n";
  for (const auto& c : res.cells) {
    if (c.failed) {
      std::string msg = c.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      failures << c.report.method << ',' << format_double(c.report.r_train) << ',' << c.report.seed << ',' << c.k << ','
               << msg << ',' << h << '\n';
      continue;
    }
    csv << c.report.csv_row() << ',' << c.k << ',' << h << '\n';
    json j = json::parse(c.report.to_json());
    j["k"] = c.k;
    j["config_hash"] = h;
    jsonl << j.dump() << '\n';
  }
  write_text(dir / "results.csv", csv.str());
  write_text(dir / "results.jsonl", jsonl.str());
  write_text(dir / "failures.csv", failures.str());

  std::vector<CriterionCheck> checks;
  if (cfg.mode == Mode::Figure1) {
    const std::pair<const char*, Metric> metrics[] = {
        {"f1", metric_f1}, {"rank_average", metric_rank}, {"rmse_mean", metric_rmse_mean}, {"rmse_std", metric_rmse_std}};
    for (const auto& [name, metric] : metrics) {
      std::ostringstream plot;
      plot << "r_tr";
      for (auto m : cfg.methods) plot << ',' << eval::to_string(m);
      plot << ",config_hash\n";
      for (double r : cfg.r_train) {
        plot << format_double(r);
        for (auto m : cfg.methods) {
          const double v = cell_median(res, eval::to_string(m), r, cfg.top_k, metric);
          plot << ',' << (std::isnan(v) ? "" : format_double(v));
        }
        plot << ',' << h << '\n';
      }
      write_text(dir / (std::string("plot_") + name + ".csv"), plot.str());
    }
    checks = figure1_checks(cfg, res);
  } else {
    std::ostringstream plot;
    plot << "k,rmse_mean,rmse_std,config_hash\n";
    const std::string name = eval::to_string(cfg.figure2.method);
    for (std::size_t k = 1; k <= cfg.figure2.max_k; ++k) {
      const double m = cell_median(res, name, cfg.figure2.r_train, k, metric_rmse_mean);
      const double s = cell_median(res, name, cfg.figure2.r_train, k, metric_rmse_std);
      plot << k << ',' << (std::isnan(m) ? "" : format_double(m)) << ',' << (std::isnan(s) ? "" : format_double(s))
           << ',' << h << '\n';
    }
    write_text(dir / "plot_figure2.csv", plot.str());
    checks = figure2_checks(cfg, res);
  }

  std::ostringstream summary;
  summary << "config_hash " << h << "\n";
  summary << "cells " << res.cells.size() << ", failed " << res.failures() << "\n";
  for (const auto& c : checks) summary << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  [" << c.detail << "]\n";
  write_text(dir / "summary.txt", summary.str());

  json manifest;
  manifest["config"] = json::parse(cfg.to_json());
  manifest["config_hash"] = h;
  manifest["datasets"] = dataset_records(data);
  manifest["selection_rules"] = {
      {"DWR", "grid point with smallest max off-diagonal |weighted cov|"},
      {"SRDO", "gamma with smallest max off-diagonal |weighted cov| after clipping"},
      {"LASSO", "alpha with smallest held-out MSE inside the training environment"},
      {"tie_break", eval::kTieBreakRule}};
  manifest["cells"] = res.cells.size();
  manifest["failed_cells"] = res.failures();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace stablesel::experiment
