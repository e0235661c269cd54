#include "cpscan/diff_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cpscan/linalg.hpp"

namespace cpscan {

LassoProblem make_lasso_problem(const Dataset& ds, Index theta_hat, double lambda) {
  const Index n = ds.n();
  if (theta_hat < 1 || theta_hat > n - 1) {
    std::ostringstream msg;
    msg << "lasso: split " << theta_hat << " outside [1, " << n - 1 << "]";
    throw std::out_of_range(msg.str());
  }
  if (!(lambda > 0.0)) throw ConfigError("lasso: lambda must be positive");
  const double nd = static_cast<double>(n);
  const double th = static_cast<double>(theta_hat);
  LassoProblem prob;
  prob.x = &ds.x();
  prob.theta_hat = theta_hat;
  prob.z.resize(n);
  for (Index t = 0; t < n; ++t) {
    prob.z(t) = t < theta_hat ? -(nd / th) * ds.y()(t) : (nd / (nd - th)) * ds.y()(t);
  }
  prob.lambda_eff = lambda * std::sqrt(nd / (th * (nd - th)));
  return prob;
}

double lasso_objective(const LassoProblem& prob, const Vector& a) {
  const Vector resid = prob.z - *prob.x * a;
  return resid.squaredNorm() / (2.0 * static_cast<double>(prob.n())) + prob.lambda_eff * a.lpNorm<1>();
}

double lasso_kkt_gap(const LassoProblem& prob, const Vector& a) {
  const Vector grad = prob.x->transpose() * (prob.z - *prob.x * a) / static_cast<double>(prob.n());
  double gap = 0.0;
  for (Index j = 0; j < a.size(); ++j) {
    if (a(j) != 0.0) {
      const double sign = a(j) > 0.0 ? 1.0 : -1.0;
      gap = std::max(gap, std::abs(grad(j) - prob.lambda_eff * sign));
    } else {
      gap = std::max(gap, std::abs(grad(j)) - prob.lambda_eff);
    }
  }
  return gap;
}

namespace {

double soft_threshold(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

}  // namespace

LassoSolution solve_lasso(const LassoProblem& prob, const LassoOptions& opts) {
  if (!(opts.tol > 0.0) || opts.max_sweeps < 1) throw ConfigError("lasso: tol must be > 0 and max_sweeps >= 1");
  const Index n = prob.n();
  const Index p = prob.p();
  const double nd = static_cast<double>(n);
  const double lambda = prob.lambda_eff;
  // Column-major copy: coordinate updates stream whole columns.
  const Eigen::MatrixXd x = *prob.x;
  const Vector col_sq = x.colwise().squaredNorm().transpose() / nd;

  LassoSolution sol;
  Vector a = Vector::Zero(p);
  Vector resid = prob.z;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (col_sq(j) == 0.0) continue;
      const double rho = x.col(j).dot(resid) / nd + col_sq(j) * a(j);
      const double next = soft_threshold(rho, lambda) / col_sq(j);
      const double diff = next - a(j);
      if (diff != 0.0) {
        resid.noalias() -= diff * x.col(j);
        a(j) = next;
        max_change = std::max(max_change, std::abs(diff));
      }
    }
    if (sweep % 64 == 0) resid = prob.z - x * a;  // bound drift of the running residual
    sol.sweep_objectives.push_back(resid.squaredNorm() / (2.0 * nd) + lambda * a.lpNorm<1>());
    sol.iterations = sweep;
    if (max_change < opts.tol) {
      sol.converged = true;
      break;
    }
  }
  sol.delta_hat = std::move(a);
  sol.objective = lasso_objective(prob, sol.delta_hat);
  sol.kkt_gap = lasso_kkt_gap(prob, sol.delta_hat);
  return sol;
}

double default_lambda(const Dataset& ds, double c_lambda, bool* degenerate) {
  const double norm = largest_gram_eigenvalue(ds.x()).value;
  const Vector& y = ds.y();
  const double mean = y.mean();
  const double psi = std::sqrt((y.array() - mean).square().sum() / static_cast<double>(ds.n() - 1));
  const double lambda = c_lambda * std::sqrt(std::max(norm, 0.0)) * psi *
                        std::sqrt(std::log(static_cast<double>(std::max(ds.p(), ds.n()))));
  if (degenerate) *degenerate = !(lambda > 0.0);
  return lambda > 0.0 ? lambda : 0.0;
}

Index default_varpi_r(Index n, Index p) {
  const double v = std::ceil(std::log(static_cast<double>(std::max(n, p))));
  return std::max<Index>(2, static_cast<Index>(v));
}

RefinementResult refine(const PrefixSummaries& ps, const Vector& delta_hat, Index varpi_r, bool use_abs,
                        bool keep_trace) {
  const Index n = ps.n();
  if (delta_hat.size() != ps.p()) throw ConfigError("refine: delta-hat has the wrong length");
  if (varpi_r < 1 || n <= 2 * varpi_r + 1) {
    std::ostringstream msg;
    msg << "refine: trimming " << varpi_r << " leaves no interior split for n = " << n;
    throw ConfigError(msg.str());
  }
  std::vector<Index> support;
  for (Index j = 0; j < delta_hat.size(); ++j) {
    if (delta_hat(j) != 0.0) support.push_back(j);
  }
  if (support.empty()) throw ConfigError("refine: delta-hat is identically zero");

  auto projected = [&](Index k) {
    const auto row = ps.s(k);
    double acc = 0.0;
    for (Index j : support) acc += delta_hat(j) * row[j];
    return acc;
  };
  const double nd = static_cast<double>(n);
  const double q_n = projected(n);

  RefinementResult out;
  out.varpi_r = varpi_r;
  if (keep_trace) out.projected_stats.reserve(static_cast<std::size_t>(n - 2 * varpi_r - 1));
  double best = -std::numeric_limits<double>::infinity();
  for (Index k = varpi_r + 1; k <= n - varpi_r - 1; ++k) {
    const double kd = static_cast<double>(k);
    double v = std::sqrt(nd / (kd * (nd - kd))) * (kd / nd * q_n - projected(k));
    if (use_abs) v = std::abs(v);
    if (keep_trace) out.projected_stats.push_back(v);
    if (v > best) {
      best = v;
      out.theta_r = k;
    }
  }
  return out;
}

OcScanRResult refine_ocscan(const Dataset& ds, const PrefixSummaries& ps, OcScanResult oc,
                            const RefineOptions& opts) {
  if (oc.q_hat != 1 || oc.theta_oc >= ds.n()) {
    throw ConfigError("OcScan.R needs a detected change (q_hat = 1)");
  }
  OcScanRResult out;
  out.lambda = opts.lambda ? *opts.lambda : default_lambda(ds, opts.c_lambda);
  out.theta_r = oc.theta_oc;
  const Index theta = oc.theta_oc;
  out.oc = std::move(oc);
  if (!(out.lambda > 0.0)) {
    out.fallback = true;
    return out;
  }

  if (opts.standardize) {
    const double nd = static_cast<double>(ds.n());
    Vector scale = (ds.x().colwise().squaredNorm().transpose() / nd).cwiseSqrt();
    for (Index j = 0; j < scale.size(); ++j) {
      if (scale(j) == 0.0) scale(j) = 1.0;
    }
    Matrix scaled = ds.x() * scale.cwiseInverse().asDiagonal();
    const Dataset standardized(std::move(scaled), ds.y());
    out.lasso = solve_lasso(make_lasso_problem(standardized, theta, out.lambda), opts.lasso);
    out.lasso.delta_hat = out.lasso.delta_hat.cwiseQuotient(scale);
  } else {
    out.lasso = solve_lasso(make_lasso_problem(ds, theta, out.lambda), opts.lasso);
  }

  if (out.lasso.delta_hat.isZero(0.0)) {
    out.fallback = true;
    return out;
  }
  const Index varpi = opts.varpi_r ? *opts.varpi_r : default_varpi_r(ds.n(), ds.p());
  out.refinement = refine(ps, out.lasso.delta_hat, varpi, opts.use_abs, opts.keep_trace);
  out.theta_r = out.refinement->theta_r;
  return out;
}

OcScanRResult run_ocscan_r(const Dataset& ds, const PrefixSummaries& ps, const DetectorConfig& cfg,
                           const RefineOptions& opts) {
  OcScanResult oc = run_ocscan(ps, cfg);
  if (oc.q_hat != 1) throw ConfigError("OcScan.R needs a detected change (q_hat = 1)");
  return refine_ocscan(ds, ps, std::move(oc), opts);
}

}  // namespace cpscan
