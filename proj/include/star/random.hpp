// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace star {

/// Mixes a master seed with a path of integers (condition, block, trial...)
/// into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Portable random source: mt19937_64 plus hand-rolled transforms, so streams
/// are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double mean = 0.0, double sd = 1.0);
  /// Normal conditioned on > 0. sd == 0 returns the mean unchanged.
  double positive_normal(double mean, double sd);
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform index in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace star
