#pragma once

#include <algorithm>
#include <string_view>

#include "cpscan/dataset.hpp"
#include "cpscan/types.hpp"

namespace cpscan {

/// MAX is the l-infinity covariance contrast (McScan), QUAD the centred
/// quadratic form (QcScan).
enum class DetectorKind { Max, Quad };

std::string_view to_string(DetectorKind kind);

/// Rescaled response: -sqrt((n-k)/(nk)) Y_t for t <= k and
/// sqrt(k/(n(n-k))) Y_t for t > k (1-based t). Requires 1 <= k <= n-1.
Vector tilde_y(const Vector& y, Index k);

/// sqrt(n/(k(n-k))) |S_k - (k/n) S_n|_inf in O(p). k = n returns 0.
double mcscan_stat(const PrefixSummaries& ps, Index k);

/// (n/(k(n-k))) |S_k - (k/n) S_n|_2^2
///   - a0 ((n-2k)/(k(n-k)) r_k + k/(n(n-k)) r_n), in O(p). k = n returns 0.
/// The value is returned unclamped and may be negative.
double qcscan_stat(const PrefixSummaries& ps, Index k);

double detector_stat(DetectorKind kind, const PrefixSummaries& ps, Index k);

/// |X^T Ytilde(k)|_inf computed from the definition, O(np).
double direct_mcscan(const Dataset& ds, Index k);

/// Ytilde(k)^T (X X^T - tr(X X^T)/n I) Ytilde(k) with the n x n Gram matrix
/// formed explicitly, O(n^2 p).
double direct_qcscan(const Dataset& ds, Index k);

/// Population parameters of the AMOC model used for the expectation formulas.
class PopulationModel {
 public:
  /// theta = n encodes "no change". Checks shapes, symmetry of sigma (1e-10)
  /// and noise_sd >= 0; the eigenvalue check lives in check_psd().
  PopulationModel(SquareMatrix sigma, Vector beta0, Vector beta1, double noise_sd, Index theta, Index n);

  const SquareMatrix& sigma() const { return sigma_; }
  const Vector& beta0() const { return beta0_; }
  const Vector& beta1() const { return beta1_; }
  double noise_sd() const { return noise_sd_; }
  Index theta() const { return theta_; }
  Index n() const { return n_; }
  Index p() const { return sigma_.rows(); }

  Vector delta() const { return beta1_ - beta0_; }
  /// max(|Sigma^{1/2} beta0|_2, |Sigma^{1/2} beta1|_2, sigma).
  double psi() const { return psi_; }
  /// min(theta, n - theta).
  Index min_segment() const { return std::min(theta_, n_ - theta_); }

  /// Recomputes Psi from the fields.
  double recompute_psi() const;

  /// Throws ConfigError when the smallest eigenvalue of sigma is below -tol.
  void check_psd(double tol = 1e-8) const;

 private:
  SquareMatrix sigma_;
  Vector beta0_;
  Vector beta1_;
  double noise_sd_;
  Index theta_;
  Index n_;
  double psi_;
};

/// The closed-form centre f_k of T_k (both k <= theta and k > theta branches).
double mean_fk(const PopulationModel& model, Index n, Index k);

/// E[X^T Ytilde(k)] = sqrt(k(n-k)/n) ((n-theta)/(n-k) 1{k<=theta} + theta/k 1{k>theta}) Sigma delta.
Vector mean_fbar(const PopulationModel& model, Index n, Index k);

}  // namespace cpscan
