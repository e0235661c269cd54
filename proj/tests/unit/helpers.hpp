#pragma once

#include <cmath>

#include "cpscan/dataset.hpp"
#include "cpscan/rng.hpp"

namespace testutil {

using cpscan::Dataset;
using cpscan::Index;
using cpscan::Matrix;
using cpscan::Vector;

// n=4, p=1, X = ones, Y = (0, 0, 1, 1).
inline Dataset toy() {
  Matrix x = Matrix::Ones(4, 1);
  Vector y(4);
  y << 0, 0, 1, 1;
  return Dataset(x, y);
}

inline Dataset random_dataset(Index n, Index p, std::uint64_t seed) {
  cpscan::Rng rng(seed);
  Matrix x(n, p);
  Vector y(n);
  for (Index t = 0; t < n; ++t) {
    for (Index j = 0; j < p; ++j) x(t, j) = rng.normal();
    y(t) = rng.normal() + (t > n / 2 ? x(t, 0) : 0.0);
  }
  return Dataset(x, y);
}

inline bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * (1.0 + std::abs(b)); }

}  // namespace testutil
