#pragma once

#include <Eigen/Eigenvalues>

#include "cpscan/diff_estimation.hpp"

namespace testutil {

// FISTA with adaptive restart on (1/2n)|z - X a|^2 + lambda |a|_1, started
// from zero. Independent of the coordinate-descent code path.
inline cpscan::Vector fista_lasso(const cpscan::LassoProblem& prob, int max_iter = 200000) {
  using cpscan::Vector;
  const Eigen::MatrixXd x = *prob.x;
  const double n = static_cast<double>(x.rows());
  const Eigen::MatrixXd gram = x.transpose() * x / n;
  const double lipschitz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff();
  const double step = 1.0 / lipschitz;
  const Vector xtz = x.transpose() * prob.z / n;
  auto objective = [&](const Vector& a) {
    return (prob.z - x * a).squaredNorm() / (2 * n) + prob.lambda_eff * a.lpNorm<1>();
  };
  auto prox = [&](const Vector& v) {
    Vector out(v.size());
    const double thr = step * prob.lambda_eff;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      out(j) = v(j) > thr ? v(j) - thr : (v(j) < -thr ? v(j) + thr : 0.0);
    }
    return out;
  };
  Vector a = Vector::Zero(x.cols());
  Vector y = a;
  double t = 1.0;
  double prev_obj = objective(a);
  for (int it = 0; it < max_iter; ++it) {
    const Vector grad = gram * y - xtz;
    const Vector next = prox(y - step * grad);
    const double obj = objective(next);
    if (obj > prev_obj) {  // restart momentum
      t = 1.0;
      y = a;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - a);
    const double change = (next - a).lpNorm<Eigen::Infinity>();
    a = next;
    t = t_next;
    prev_obj = obj;
    if (change < 1e-14) break;
  }
  return a;
}

}  // namespace testutil
