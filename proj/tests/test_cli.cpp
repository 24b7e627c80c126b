#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stablesel/csv.hpp"
#include "stablesel/rng.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(STABLESEL_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t got = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("stablesel_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& f) const { return (dir_ / f).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenWritesOneCsvPerEnvironment) {
  const auto r = cli("gen --n 100 --r-train 2.5 --r-test 3 --seeds 0 -o " + path("g"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(slurp(path("g/train_r2.5_seed0.csv"))), 101u);
  EXPECT_EQ(lines(slurp(path("g/test_r3_seed0.csv"))), 101u);
  const auto m = nlohmann::json::parse(slurp(path("g/manifest.json")));
  for (const auto& d : m["datasets"]) EXPECT_GT(d["acceptance_rate"].get<double>(), 0.0);
  ASSERT_EQ(cli("gen --n 100 --r-train 2.5 --r-test 3 --seeds 0 -o " + path("h")).code, 0);
  EXPECT_EQ(slurp(path("g/train_r2.5_seed0.csv")), slurp(path("h/train_r2.5_seed0.csv")));
  const auto mh = nlohmann::json::parse(slurp(path("h/manifest.json")));
  EXPECT_EQ(m["config_hash"], mh["config_hash"]);
}

TEST_F(Cli, WeightsOnIndependentColumns) {
  stablesel::Rng rng(1);
  stablesel::Matrix x(1000, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  stablesel::write_dataset_csv(path("ind.csv"), stablesel::Dataset(x, x.col(0)));
  const auto r = cli("weights --data " + path("ind.csv") + " --method dwr --out " + path("w.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto pos = r.out.find("max_abs_weighted_cov=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stod(r.out.substr(pos + 21)), 0.05);
  EXPECT_EQ(lines(slurp(path("w.csv"))), 1001u);
  EXPECT_NE(r.out.find("mean=1"), std::string::npos);
}

TEST_F(Cli, SrdoWeightsRespectClipAndRepeat) {
  ASSERT_EQ(cli("gen --n 500 --r-train 2.5 --r-test 3 --seeds 0 -o " + path("g")).code, 0);
  const std::string data = path("g/train_r2.5_seed0.csv");
  ASSERT_EQ(cli("weights --data " + data + " --method srdo --gamma 5 --epochs 20 --seed 3 --out " + path("a.csv")).code, 0);
  ASSERT_EQ(cli("weights --data " + data + " --method srdo --gamma 5 --epochs 20 --seed 3 --out " + path("b.csv")).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  const auto w = stablesel::read_weights_csv(path("a.csv"));
  EXPECT_LE(w.maxCoeff() / w.minCoeff(), 25.0 * (1 + 1e-12));
}

TEST_F(Cli, ReproduceSingleCell) {
  const auto r = cli("reproduce --n 200 --n-test 100 --r-train 2 --r-test -2 2 --methods OLS --seeds 0 -o " + path("r"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto csv = slurp(path("r/results.csv"));
  EXPECT_EQ(lines(csv), 2u);
  EXPECT_EQ(csv.rfind("method,r_tr,seed,rank_average,f1,rmse_mean,rmse_std", 0), 0u);
  EXPECT_TRUE(fs::exists(path("r/plot_rank_average.csv")));
}

TEST_F(Cli, ReproduceFigure2Mode) {
  std::ofstream(path("c.json")) << R"({"n": 300, "n_test": 100, "r_test": [-2.0, 2.0], "seeds": [0], "mode": "figure2",
    "hyper": {"srdo_epochs": 2}, "regressor": {"epochs": 2}})";
  const auto r = cli("reproduce -c " + path("c.json") + " -o " + path("f2"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines(slurp(path("f2/results.csv"))), 11u);
  EXPECT_EQ(lines(slurp(path("f2/plot_figure2.csv"))), 11u);
}

TEST_F(Cli, ReproduceReportsCellFailures) {
  std::ofstream(path("c.json")) << R"({"n": 200, "n_test": 100, "r_train": [2.0], "r_test": [2.0], "seeds": [0],
    "methods": ["OLS", "DWR"], "hyper": {"dwr_lambda1": []}, "regressor": {"epochs": 2}})";
  const auto r = cli("reproduce -c " + path("c.json") + " -o " + path("f"));
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_EQ(lines(slurp(path("f/results.csv"))), 2u);
  EXPECT_EQ(lines(slurp(path("f/failures.csv"))), 2u);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  std::ofstream(path("bad.json")) << R"({"r_train": [0.5]})";
  EXPECT_EQ(cli("reproduce -c " + path("bad.json")).code, 2);
  EXPECT_EQ(cli("reproduce -c " + path("missing.json")).code, 2);
  EXPECT_EQ(cli("nonsense").code, 2);
  EXPECT_EQ(cli("weights --data " + path("missing.csv")).code, 2);
}

TEST_F(Cli, SelectAndEval) {
  ASSERT_EQ(cli("gen --n 400 --r-train 2 --r-test -2 2 --seeds 0 -o " + path("g")).code, 0);
  const auto s = cli("select --data " + path("g/train_r2_seed0.csv") + " --method ols --k 5");
  ASSERT_EQ(s.code, 0) << s.out;
  const auto j = nlohmann::json::parse(s.out);
  EXPECT_EQ(j["order"].size(), 10u);
  EXPECT_EQ(j["selected"].size(), 5u);
  const auto e = cli("eval --train " + path("g/train_r2_seed0.csv") + " --test " + path("g/test_r-2_seed0.csv") +
                     " --test " + path("g/test_r2_seed0.csv") + " --r-te -2 2 --method corr");
  ASSERT_EQ(e.code, 0) << e.out;
  EXPECT_NE(e.out.find("CORR,0,0,"), std::string::npos);
}

TEST_F(Cli, OracleVerify) {
  const auto r = cli("oracle-verify --instances 20");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("minimal stable set {X1}, markov boundary {X1, X2}"), std::string::npos);
  std::ofstream(path("j.json")) << R"({"feature_supports": [[0, 1], [0, 1]], "outcome_support": [0, 1],
    "probs": [0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0]})";
  const auto x = cli("oracle-verify --joint " + path("j.json"));
  EXPECT_EQ(x.code, 0) << x.out;
  EXPECT_NE(x.out.find("markov boundary: {X1, X2}"), std::string::npos);
}
