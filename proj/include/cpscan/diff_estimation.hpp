#pragma once

#include <optional>
#include <vector>

#include "cpscan/dataset.hpp"
#include "cpscan/scanners.hpp"

namespace cpscan {

/// min_a (1/2n) |z - X a|_2^2 + lambda_eff |a|_1, where z stacks
/// -(n/theta) Y_t (t <= theta) over (n/(n-theta)) Y_t (t > theta) and
/// lambda_eff = lambda sqrt(n / (theta (n - theta))).
struct LassoProblem {
  const Matrix* x = nullptr;  // non-owning; must outlive the problem
  Vector z;
  Index theta_hat = 0;
  double lambda_eff = 0.0;

  Index n() const { return x->rows(); }
  Index p() const { return x->cols(); }
};

LassoProblem make_lasso_problem(const Dataset& ds, Index theta_hat, double lambda);

struct LassoOptions {
  double tol = 1e-8;       // on the largest coordinate change in a sweep
  int max_sweeps = 10000;
};

struct LassoSolution {
  Vector delta_hat;
  double objective = 0.0;
  int iterations = 0;  // full sweeps
  double kkt_gap = 0.0;
  bool converged = false;
  std::vector<double> sweep_objectives;  // objective after each sweep
};

double lasso_objective(const LassoProblem& prob, const Vector& a);

/// Largest violation of the Lasso optimality conditions at `a`.
double lasso_kkt_gap(const LassoProblem& prob, const Vector& a);

/// Cyclic coordinate descent (coordinates 1..p in order) from a = 0 with
/// soft-threshold updates and a maintained residual. Non-convergence is
/// reported through `converged`, never thrown.
LassoSolution solve_lasso(const LassoProblem& prob, const LassoOptions& opts = {});

/// lambda = c_lambda |Sigma|^{1/2} Psi sqrt(log(max(p, n))) with plug-ins.
/// Returns 0 (and sets *degenerate when given) if a plug-in is zero.
double default_lambda(const Dataset& ds, double c_lambda = 1.0, bool* degenerate = nullptr);

/// ceil(log(max(p, n))), at least 2.
Index default_varpi_r(Index n, Index p);

struct RefinementResult {
  Index theta_r = 0;
  Index varpi_r = 0;
  std::vector<double> projected_stats;  // entry i is the statistic at k = varpi_r + 1 + i
};

/// argmax over varpi_r < k < n - varpi_r of
/// delta^T X^T Ytilde(k) = sqrt(n/(k(n-k))) delta^T ((k/n) S_n - S_k),
/// signed unless use_abs. Smallest index on ties. Rejects delta = 0.
RefinementResult refine(const PrefixSummaries& ps, const Vector& delta_hat, Index varpi_r, bool use_abs = false,
                        bool keep_trace = false);

struct RefineOptions {
  double c_lambda = 1.0;
  std::optional<double> lambda;   // overrides default_lambda
  std::optional<Index> varpi_r;   // default_varpi_r when unset
  bool use_abs = false;
  bool standardize = false;       // opt-in column scaling before the Lasso
  bool keep_trace = false;
  LassoOptions lasso;
};

struct OcScanRResult {
  OcScanResult oc;
  double lambda = 0.0;
  LassoSolution lasso;
  std::optional<RefinementResult> refinement;
  Index theta_r = 0;
  bool fallback = false;  // delta-hat was zero; theta_r = theta_oc
};

/// OcScan, then the Lasso at theta_oc, then refine. Requires the OcScan run
/// to detect a change (throws ConfigError otherwise). `cfg` must already be
/// calibrated.
OcScanRResult run_ocscan_r(const Dataset& ds, const PrefixSummaries& ps, const DetectorConfig& cfg,
                           const RefineOptions& opts = {});

/// Refinement step given an OcScan result with q_hat = 1.
OcScanRResult refine_ocscan(const Dataset& ds, const PrefixSummaries& ps, OcScanResult oc,
                            const RefineOptions& opts = {});

}  // namespace cpscan
