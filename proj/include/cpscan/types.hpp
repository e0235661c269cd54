#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cpscan {

using Index = std::ptrdiff_t;
using Vector = Eigen::VectorXd;
// Row t is the regressor x_t; rows are contiguous so prefix rows can be read as spans.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SquareMatrix = Eigen::MatrixXd;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input data. The CLI maps this to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, plan or argument combination. CLI exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A bookkeeping invariant was violated inside an algorithm.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cpscan
