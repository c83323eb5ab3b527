#pragma once

#include <array>
#include <cstdint>

namespace capaboost {

// splitmix64 finalizer (Vigna). Used for seed expansion and seed derivation;
// the exact constants are part of the reproducibility contract, do not change.
std::uint64_t mix64(std::uint64_t x);

// Deterministic random stream: xoshiro256++ seeded via splitmix64.
//
// The generator algorithm is fixed so that sequences are identical across
// platforms, compilers and releases; mask and weight regeneration depends on
// this. Reference outputs are frozen in tests/test_rng.cpp. Platform-native
// generators (std::mt19937 etc.) are deliberately not used anywhere.
//
// Gaussian variates use the trigonometric Box-Muller transform with the
// second variate cached, consuming exactly two uniforms per pair.
//
// Single-owner mutable state: never share one stream across threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  // Next raw 64-bit word (xoshiro256++).
  std::uint64_t next_u64();

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform01();

  // Standard normal N(0, 1).
  double gaussian();

  // Uniform integer in [0, n), unbiased via power-of-two masked rejection.
  std::uint64_t uniform_below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace capaboost
