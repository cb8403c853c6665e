#pragma once

#include <cstdint>
#include <random>

namespace passnet {

// Deterministic random stream. Every stochastic routine takes an Rng& so a
// run is reproducible from a single 64-bit seed; derived streams (per game,
// per chain) are split with splitmix64 rather than by offsetting the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }  // [0, 1)

  double exponential(double rate) {
    // Inverse CDF on 1-u so u == 0 maps to a finite value.
    return -std::log1p(-uniform()) / rate;
  }

  int uniform_int(int lo, int hi) {  // inclusive range
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t split(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace passnet
