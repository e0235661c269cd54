#pragma once

#include "cpscan/types.hpp"

namespace cpscan {

struct EigenDecomposition {
  Vector values;        // ascending
  SquareMatrix vectors;  // column i pairs with values(i)
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps until the
/// off-diagonal Frobenius norm drops below off_tol * max(1, |A|_F).
EigenDecomposition jacobi_eigen(const SquareMatrix& a, double off_tol = 1e-11, int max_sweeps = 100);

/// Max-abs asymmetry |A - A^T|.
double asymmetry(const SquareMatrix& a);

/// Symmetric (principal) square root through the Jacobi eigenbasis; negative
/// eigenvalues are clamped to zero. Throws ConfigError when `a` is asymmetric
/// beyond `sym_tol` or has an eigenvalue below -psd_tol.
SquareMatrix symmetric_sqrt(const SquareMatrix& a, double sym_tol = 1e-10, double psd_tol = 1e-8);

/// Moore-Penrose pseudo-inverse of Sigma^{1/2} applied to `target`, treating
/// eigenvalues of Sigma below `null_tol` as null directions.
Vector sqrt_pseudo_solve(const EigenDecomposition& sigma_eig, const Vector& target, double null_tol = 1e-10);

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
};

/// Largest eigenvalue of (1/n) X^T X by power iteration, applied as
/// X^T (X v) / n so the p x p Gram matrix is never formed. Stops after
/// max_iter iterations or when the relative change falls below rel_tol.
PowerIterationResult largest_gram_eigenvalue(const Matrix& x, int max_iter = 50, double rel_tol = 1e-8);

}  // namespace cpscan
