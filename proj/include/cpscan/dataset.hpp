#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpscan/types.hpp"

namespace cpscan {

/// Regressors and response of a single AMOC sample, in time order.
///
/// Row t of `x` is x_t and y(t) is Y_t. Construction rejects shape mismatches,
/// n < 4, p < 1 and any non-finite entry (reporting the offending cell), so a
/// Dataset in hand is always valid.
class Dataset {
 public:
  Dataset(Matrix x, Vector y);

  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }
  const Matrix& x() const { return x_; }
  const Vector& y() const { return y_; }

  /// Dataset with time reversed: row t becomes row n-1-t.
  Dataset reversed() const;

  /// Dataset whose row t is row order[t] of this one.
  Dataset permuted(std::span<const Index> order) const;

 private:
  Matrix x_;
  Vector y_;
};

/// Cumulative summaries a0, r_k and S_k for k = 0..n.
///
/// With these, every McScan / QcScan evaluation costs O(p). Immutable after
/// construction.
class PrefixSummaries {
 public:
  PrefixSummaries(double a0, Vector r, Matrix s);

  Index n() const { return r_.size() - 1; }
  Index p() const { return s_.cols(); }

  /// (1/n) sum_t |x_t|^2.
  double a0() const { return a0_; }
  /// sum_{t<=k} Y_t^2, r(0) = 0.
  double r(Index k) const { return r_(k); }
  /// sum_{t<=k} x_t Y_t as a contiguous row, s(0) = 0.
  std::span<const double> s(Index k) const {
    return {s_.data() + k * s_.cols(), static_cast<std::size_t>(s_.cols())};
  }

  const Vector& r_all() const { return r_; }
  const Matrix& s_all() const { return s_; }

 private:
  double a0_;
  Vector r_;
  Matrix s_;
};

/// O(np) single pass with Neumaier-compensated running sums.
PrefixSummaries precompute(const Dataset& ds);

/// S_k - (k/n) S_n, for 1 <= k <= n-1.
Vector contrast(const PrefixSummaries& ps, Index k);

/// Reads the CSV dataset format: column 0 is Y, columns 1..p are x_t, one row
/// per time point. With `header` the first line is skipped.
Dataset read_csv(std::istream& in, bool header);
Dataset read_csv_file(const std::filesystem::path& path, bool header);

/// Writes the CSV dataset format using shortest round-trip decimals.
void write_csv(std::ostream& out, const Dataset& ds, bool header);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Writes `content` to `path` via a temporary sibling file and rename, so a
/// reader never observes a truncated file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace cpscan
