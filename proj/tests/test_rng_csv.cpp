#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "stablesel/core.hpp"
#include "stablesel/csv.hpp"
#include "stablesel/error.hpp"
#include "stablesel/rng.hpp"

using namespace stablesel;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, FrozenStreamPrefix) {
  // SplitMix64 finalizer of (key + counter * golden gamma). Values frozen from
  // the reference splitmix64 sequence for seed 0.
  Rng r(0);
  EXPECT_EQ(r.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.next_u64(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(r.next_u64(), 0x06c45d188009454fULL);
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(1);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.015);
}

TEST(Rng, UniformIntAndPermutation) {
  Rng r(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) counts[r.uniform_int(7)]++;
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  auto p = r.permutation(50);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], i);
}

TEST(Rng, ForkIsDeterministicAndIndependentOfParentPosition) {
  Rng a(7), b(7);
  b.next_u64();
  Rng fa = a.fork(3), fb = b.fork(3), fc = a.fork(4);
  EXPECT_EQ(fa.next_u64(), fb.next_u64());
  EXPECT_NE(a.fork(3).next_u64(), fc.next_u64());
}

TEST(Csv, RoundTripIsExact) {
  Rng r(5);
  Matrix x(20, 3);
  Vector y(20);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = r.normal() * 1e3;
  for (auto& v : y) v = r.normal() / 7.0;
  Dataset d(x, y);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "x1,x2,x3,y");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const Dataset back = read_dataset_csv(ss);
  EXPECT_EQ(back.features(), d.features());
  EXPECT_EQ(back.outcome(), d.outcome());
}

TEST(Csv, ParseErrors) {
  std::stringstream bad1("x1,y\n1,2\n3\n");
  EXPECT_THROW(read_dataset_csv(bad1), ParseError);
  std::stringstream bad2("x1,y\n1,abc\n");
  EXPECT_THROW(read_dataset_csv(bad2), ParseError);
  std::stringstream empty("");
  EXPECT_THROW(read_dataset_csv(empty), ParseError);
}

TEST(Csv, WeightsRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "stablesel_w_test.csv").string();
  Vector raw(4);
  raw << 0.1, 2.0 / 3.0, 1.0, 5.0;
  const auto w = WeightVector::normalized(raw);
  write_weights_csv(path, w);
  EXPECT_EQ(read_weights_csv(path), w.values());
  std::remove(path.c_str());
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.5), "2.5");
  EXPECT_EQ(format_double(-3.0), "-3");
  const double v = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(v)), v);
}
