#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "cpscan/types.hpp"

namespace cpscan {

/// SplitMix64 finaliser; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Derives a seed for the stream addressed by `path` under `base`. The same
/// (base, path) always yields the same seed, independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniforms take the top 53 bits of one draw, normals use the
/// Marsaglia polar method and bounded integers use rejection sampling, so the
/// streams do not depend on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Standard normal variate.
  double normal();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Uniformly random permutation of 0..n-1 (Fisher-Yates).
  std::vector<Index> permutation(Index n);

  /// Uniformly random subset of size m from 0..n-1, in draw order.
  std::vector<Index> sample_without_replacement(Index n, Index m);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cpscan
