#include "cpscan/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace cpscan {

namespace {

double off_diagonal_norm(const SquareMatrix& a) {
  double sum = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

EigenDecomposition jacobi_eigen(const SquareMatrix& input, double off_tol, int max_sweeps) {
  if (input.rows() != input.cols()) throw ConfigError("jacobi_eigen: matrix is not square");
  const Index p = input.rows();
  SquareMatrix a = input;
  SquareMatrix v = SquareMatrix::Identity(p, p);
  const double scale = std::max(1.0, input.norm());

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) < off_tol * scale) break;
    for (Index i = 0; i < p - 1; ++i) {
      for (Index j = i + 1; j < p; ++j) {
        const double aij = a(i, j);
        if (aij == 0.0) continue;
        const double theta = (a(j, j) - a(i, i)) / (2.0 * aij);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J = rotation in the (i, j) plane.
        for (Index k = 0; k < p; ++k) {
          const double aki = a(k, i);
          const double akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
        for (Index k = 0; k < p; ++k) {
          const double aik = a(i, k);
          const double ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        a(i, j) = 0.0;
        a(j, i) = 0.0;
        for (Index k = 0; k < p; ++k) {
          const double vki = v(k, i);
          const double vkj = v(k, j);
          v(k, i) = c * vki - s * vkj;
          v(k, j) = s * vki + c * vkj;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) < a(y, y); });
  EigenDecomposition out;
  out.values.resize(p);
  out.vectors.resize(p, p);
  for (Index i = 0; i < p; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  out.sweeps = sweep;
  return out;
}

double asymmetry(const SquareMatrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

SquareMatrix symmetric_sqrt(const SquareMatrix& a, double sym_tol, double psd_tol) {
  if (a.rows() != a.cols()) throw ConfigError("symmetric_sqrt: matrix is not square");
  if (a.size() == 0) return a;
  const double asym = asymmetry(a);
  if (asym > sym_tol) {
    std::ostringstream msg;
    msg << "symmetric_sqrt: matrix is not symmetric (max |A - A^T| = " << asym << ")";
    throw ConfigError(msg.str());
  }
  const EigenDecomposition eig = jacobi_eigen(0.5 * (a + a.transpose()));
  if (eig.values(0) < -psd_tol) {
    std::ostringstream msg;
    msg << "symmetric_sqrt: matrix is not nonnegative definite (smallest eigenvalue " << eig.values(0) << ")";
    throw ConfigError(msg.str());
  }
  const Vector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
}

Vector sqrt_pseudo_solve(const EigenDecomposition& sigma_eig, const Vector& target, double null_tol) {
  const Vector coords = sigma_eig.vectors.transpose() * target;
  Vector scaled(coords.size());
  for (Index i = 0; i < coords.size(); ++i) {
    const double lambda = sigma_eig.values(i);
    scaled(i) = lambda < null_tol ? 0.0 : coords(i) / std::sqrt(lambda);
  }
  return sigma_eig.vectors * scaled;
}

PowerIterationResult largest_gram_eigenvalue(const Matrix& x, int max_iter, double rel_tol) {
  const Index n = x.rows();
  const Index p = x.cols();
  PowerIterationResult out;
  if (n == 0 || p == 0) return out;
  // Fixed, non-symmetric start so it is not orthogonal to structured eigenvectors.
  Vector v(p);
  for (Index j = 0; j < p; ++j) v(j) = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(j));
  v.normalize();
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector xv = x * v;
    Vector w = x.transpose() * xv / static_cast<double>(n);
    const double next = v.dot(w);
    const double norm = w.norm();
    out.iterations = it;
    if (norm == 0.0) {
      lambda = 0.0;
      break;
    }
    const bool done = it > 1 && std::abs(next - lambda) <= rel_tol * std::abs(next);
    lambda = next;
    v = w / norm;
    if (done) break;
  }
  out.value = lambda;
  return out;
}

}  // namespace cpscan
