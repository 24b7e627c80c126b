#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stablesel/eval.hpp"
#include "stablesel/synthgen.hpp"

namespace stablesel::experiment {

enum class Mode { Figure1, Figure2 };

struct Figure2Settings {
  double r_train = 2.5;
  eval::Method method = eval::Method::SRDO;
  std::size_t max_k = 10;
};

struct ExperimentConfig {
  synthgen::GeneratorSpec generator;
  std::vector<double> r_train = {1.5, 1.7, 2.0, 2.3, 2.5, 2.7, 3.0};
  std::vector<double> r_test = {-3.0, -2.5, -2.0, -1.5, -1.3, 1.3, 1.5, 2.0, 2.5, 3.0};
  std::size_t n = 10000;
  std::size_t n_test = 0;  // 0: same as n
  std::vector<eval::Method> methods = {eval::Method::DWR, eval::Method::SRDO, eval::Method::OLS,
                                       eval::Method::LASSO, eval::Method::CORR};
  eval::MethodHyper hyper;
  eval::RegressorConfig regressor;
  std::vector<std::uint64_t> seeds = {0};
  std::size_t top_k = 5;
  std::string output_dir = "out";
  Mode mode = Mode::Figure1;
  Figure2Settings figure2;

  std::size_t test_size() const { return n_test == 0 ? n : n_test; }
  std::vector<std::size_t> truth() const;  // indices of the stable block

  void validate() const;  // throws ConfigError

  // Unknown keys are rejected. Missing keys keep their defaults.
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  std::string to_json() const;  // canonical form; the hash is taken over this
  std::string hash() const;     // 16 hex digits
};

// Deterministic per-dataset random stream.
Rng dataset_rng(std::uint64_t seed, const std::string& role, double r);

struct GeneratedEnvironment {
  std::string role;  // "train" or "test"
  double bias_rate = 0.0;
  std::uint64_t seed = 0;
  std::size_t attempts = 0;
  double acceptance_rate = 0.0;
  Dataset data;
};

struct GeneratedData {
  std::vector<GeneratedEnvironment> train;  // one per (seed, r_tr)
  std::map<std::uint64_t, std::vector<eval::TestEnvironment>> tests;  // per seed, ordered as r_test
  std::vector<GeneratedEnvironment> test_records;

  const Dataset& train_for(std::uint64_t seed, double r) const;
};

// Generates every training and test environment the config needs. Training
// environments are limited to `r_train_subset` when given.
GeneratedData generate(const ExperimentConfig& cfg, const std::vector<double>* r_train_subset = nullptr);

struct CellResult {
  eval::EvalReport report;
  std::size_t k = 0;  // number of selected features (figure-2 mode varies it)
  bool failed = false;
  std::string error;
};

// Bounded by STABLESEL_THREADS (default: hardware concurrency).
std::size_t worker_count();

struct RunResult {
  std::vector<CellResult> cells;  // deterministic order
  std::string hash;
  std::size_t failures() const;
};

// Runs the grid and returns results without touching the file system.
RunResult run(const ExperimentConfig& cfg, const GeneratedData& data);

struct CriterionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

double median(std::vector<double> v);

// Qualitative checks on a figure-1 style grid (needs DWR, SRDO and OLS cells).
std::vector<CriterionCheck> figure1_checks(const ExperimentConfig& cfg, const RunResult& result);
// RMSE at the stable-set size vs all features, medians over seeds.
std::vector<CriterionCheck> figure2_checks(const ExperimentConfig& cfg, const RunResult& result);

// Writes results.csv, results.jsonl, plot-data CSVs, manifest.json and
// summary.txt under cfg.output_dir.
void write_outputs(const ExperimentConfig& cfg, const GeneratedData& data, const RunResult& result);

// Writes one CSV per (role, r, seed) plus manifest.json.
void write_datasets(const ExperimentConfig& cfg, const GeneratedData& data);

std::string dataset_file_name(const std::string& role, double r, std::uint64_t seed);

}  // namespace stablesel::experiment
