#include "cpscan/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpscan/linalg.hpp"

namespace cpscan {

namespace {

void check_split(Index k, Index n, const char* who) {
  if (k < 1 || k > n - 1) {
    std::ostringstream msg;
    msg << who << ": split index " << k << " outside [1, " << n - 1 << "]";
    throw std::out_of_range(msg.str());
  }
}

}  // namespace

std::string_view to_string(DetectorKind kind) {
  return kind == DetectorKind::Max ? "MAX" : "QUAD";
}

Vector tilde_y(const Vector& y, Index k) {
  const Index n = y.size();
  check_split(k, n, "tilde_y");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double before = -std::sqrt((nd - kd) / (nd * kd));
  const double after = std::sqrt(kd / (nd * (nd - kd)));
  Vector out(n);
  for (Index t = 0; t < n; ++t) out(t) = (t < k ? before : after) * y(t);
  return out;
}

double mcscan_stat(const PrefixSummaries& ps, Index k) {
  const Index n = ps.n();
  if (k == n) return 0.0;
  check_split(k, n, "mcscan_stat");
  const auto sk = ps.s(k);
  const auto sn = ps.s(n);
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double frac = kd / nd;
  double m = 0.0;
  for (std::size_t j = 0; j < sk.size(); ++j) m = std::max(m, std::abs(sk[j] - frac * sn[j]));
  return std::sqrt(nd / (kd * (nd - kd))) * m;
}

double qcscan_stat(const PrefixSummaries& ps, Index k) {
  const Index n = ps.n();
  if (k == n) return 0.0;
  check_split(k, n, "qcscan_stat");
  const auto sk = ps.s(k);
  const auto sn = ps.s(n);
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double frac = kd / nd;
  double sq = 0.0;
  for (std::size_t j = 0; j < sk.size(); ++j) {
    const double c = sk[j] - frac * sn[j];
    sq += c * c;
  }
  const double denom = kd * (nd - kd);
  return nd / denom * sq - ps.a0() * ((nd - 2.0 * kd) / denom * ps.r(k) + kd / (nd * (nd - kd)) * ps.r(n));
}

double detector_stat(DetectorKind kind, const PrefixSummaries& ps, Index k) {
  return kind == DetectorKind::Max ? mcscan_stat(ps, k) : qcscan_stat(ps, k);
}

double direct_mcscan(const Dataset& ds, Index k) {
  if (k == ds.n()) return 0.0;
  const Vector yt = tilde_y(ds.y(), k);
  return (ds.x().transpose() * yt).cwiseAbs().maxCoeff();
}

double direct_qcscan(const Dataset& ds, Index k) {
  if (k == ds.n()) return 0.0;
  const Vector yt = tilde_y(ds.y(), k);
  const SquareMatrix gram = ds.x() * ds.x().transpose();
  SquareMatrix centred = gram;
  centred.diagonal().array() -= gram.trace() / static_cast<double>(ds.n());
  return yt.dot(centred * yt);
}

PopulationModel::PopulationModel(SquareMatrix sigma, Vector beta0, Vector beta1, double noise_sd, Index theta,
                                 Index n)
    : sigma_(std::move(sigma)),
      beta0_(std::move(beta0)),
      beta1_(std::move(beta1)),
      noise_sd_(noise_sd),
      theta_(theta),
      n_(n) {
  const Index p = sigma_.rows();
  if (sigma_.cols() != p || beta0_.size() != p || beta1_.size() != p) {
    throw ConfigError("population model: inconsistent dimensions");
  }
  if (p > 0 && asymmetry(sigma_) > 1e-10) throw ConfigError("population model: Sigma is not symmetric");
  if (!(noise_sd_ >= 0.0)) throw ConfigError("population model: noise sd must be nonnegative");
  if (theta_ < 1 || theta_ > n_) throw ConfigError("population model: theta outside [1, n]");
  psi_ = recompute_psi();
}

double PopulationModel::recompute_psi() const {
  const double q0 = std::max(0.0, beta0_.dot(sigma_ * beta0_));
  const double q1 = std::max(0.0, beta1_.dot(sigma_ * beta1_));
  return std::max({std::sqrt(q0), std::sqrt(q1), noise_sd_});
}

void PopulationModel::check_psd(double tol) const {
  if (p() == 0) return;
  const EigenDecomposition eig = jacobi_eigen(sigma_);
  if (eig.values(0) < -tol) {
    std::ostringstream msg;
    msg << "population model: Sigma has eigenvalue " << eig.values(0);
    throw ConfigError(msg.str());
  }
}

double mean_fk(const PopulationModel& model, Index n, Index k) {
  check_split(k, n, "mean_fk");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double th = static_cast<double>(model.theta());
  const Vector delta = model.delta();
  const Vector sig_delta = model.sigma() * delta;
  const Vector sig_b0 = model.sigma() * model.beta0();
  const Vector sig_b1 = model.sigma() * model.beta1();
  const double dd = sig_delta.squaredNorm();                // delta' Sigma^2 delta
  const double ds = sig_delta.dot(sig_b0 + sig_b1);         // delta' Sigma^2 (beta0 + beta1)
  const double b00 = sig_b0.squaredNorm();
  const double b11 = sig_b1.squaredNorm();

  double lead, cross;
  if (k <= model.theta()) {
    lead = (nd - th) * (nd - th) / ((nd - kd) * (nd - kd));
    cross = (th - kd) / ((nd - kd) * (nd - kd));
  } else {
    lead = th * th / (kd * kd);
    cross = -(kd - th) / (kd * kd);
  }
  return kd * (nd - kd) / nd * (lead * dd - cross * ds + b00 / kd + b11 / (nd - kd));
}

Vector mean_fbar(const PopulationModel& model, Index n, Index k) {
  check_split(k, n, "mean_fbar");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double th = static_cast<double>(model.theta());
  const double weight = k <= model.theta() ? (nd - th) / (nd - kd) : th / kd;
  return std::sqrt(kd * (nd - kd) / nd) * weight * (model.sigma() * model.delta());
}

}  // namespace cpscan
