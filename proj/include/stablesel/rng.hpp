#pragma once

#include <cstdint>
#include <vector>

namespace stablesel {

// Counter-based generator. Draw k of a stream with key K is
//   mix(K + (k + 1) * 0x9E3779B97F4A7C15)
// where mix is the SplitMix64 finalizer, so any draw can be reached in O(1)
// (`discard`) and streams are reproducible bit-for-bit on every platform.
//
// Derived distributions are also defined here rather than taken from
// <random>, whose algorithms are implementation-defined:
//   uniform()      (u64 >> 11) * 2^-53, in [0, 1)
//   normal()       Box-Muller on two uniforms, cosine branch, one value per call
//   uniform_int(n) Lemire multiply-shift with rejection
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed), counter_(0) {}

  std::uint64_t seed() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  void discard(std::uint64_t draws) { counter_ += draws; }

  // Independent child stream keyed by (this key, stream id). Does not advance
  // the parent.
  Rng fork(std::uint64_t stream) const;

  // Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t x);

// Stable 64-bit hash of a byte string (FNV-1a), used for stream ids and
// config fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t len);

}  // namespace stablesel
