#include "cpscan/scanners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "cpscan/linalg.hpp"
#include "cpscan/rng.hpp"

namespace cpscan {

void DetectorConfig::validate() const {
  if (!std::isfinite(zeta_mc) || !std::isfinite(zeta_qc)) throw ConfigError("thresholds must be finite");
  if (varpi_mc && *varpi_mc < 1) throw ConfigError("varpi_mc must be >= 1");
  if (varpi_qc && *varpi_qc < 1) throw ConfigError("varpi_qc must be >= 1");
  if (const auto* perm = std::get_if<PermutationCalibration>(&calibration)) {
    if (perm->B < 19) throw ConfigError("permutation calibration needs B >= 19");
    if (!(perm->alpha > 0.0 && perm->alpha < 0.5)) throw ConfigError("alpha must lie in (0, 0.5)");
  }
  if (const auto* plug = std::get_if<PluginCalibration>(&calibration)) {
    if (!(plug->c_bar > 0.0) || !(plug->c > 0.0)) throw ConfigError("plug-in constants must be positive");
  }
}

namespace {

Index clamp_varpi(Index v, Index n) {
  return std::max<Index>(1, std::min<Index>(std::max<Index>(v, 2), n / 4));
}

}  // namespace

Index default_varpi_mc(Index n, Index p) {
  const double nd = static_cast<double>(n);
  const double v = std::ceil(std::log(static_cast<double>(p) * std::log(nd)));
  return clamp_varpi(static_cast<Index>(std::max(v, 0.0)), n);
}

Index default_varpi_qc(Index n) {
  const double ln = std::log(static_cast<double>(n));
  const double v = std::ceil(std::log(ln * ln * ln));
  return clamp_varpi(static_cast<Index>(std::max(v, 0.0)), n);
}

Index varpi_mc(const DetectorConfig& cfg, Index n, Index p) {
  return cfg.varpi_mc ? *cfg.varpi_mc : default_varpi_mc(n, p);
}

Index varpi_qc(const DetectorConfig& cfg, Index n) {
  return cfg.varpi_qc ? *cfg.varpi_qc : default_varpi_qc(n);
}

Index permutation_order_index(int B, double alpha) {
  const double raw = std::ceil((1.0 - alpha) * static_cast<double>(B + 1) - 1e-9);
  return std::clamp<Index>(static_cast<Index>(raw), 1, B);
}

namespace {

double grid_max(DetectorKind kind, const PrefixSummaries& ps, const std::vector<Index>& grid) {
  double best = -std::numeric_limits<double>::infinity();
  for (Index k : grid) best = std::max(best, detector_stat(kind, ps, k));
  return best;
}

double order_statistic(std::vector<double> values, Index index_1based) {
  std::sort(values.begin(), values.end());
  return values[static_cast<std::size_t>(index_1based - 1)];
}

}  // namespace

PermutationThresholds calibrate_permutation_joint(const Dataset& ds, Index varpi_mc, Index varpi_qc, int B,
                                                  double alpha_mc, double alpha_qc, std::uint64_t seed) {
  if (B < 19) throw ConfigError("permutation calibration needs B >= 19");
  const auto grid_mc = dyadic_grid(ds.n(), varpi_mc);
  const auto grid_qc = dyadic_grid(ds.n(), varpi_qc);
  std::vector<double> max_mc(static_cast<std::size_t>(B));
  std::vector<double> max_qc(static_cast<std::size_t>(B));
  for (Index b = 0; b < B; ++b) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    const auto order = rng.permutation(ds.n());
    const PrefixSummaries ps = precompute(ds.permuted(order));
    max_mc[b] = grid_max(DetectorKind::Max, ps, grid_mc);
    max_qc[b] = grid_max(DetectorKind::Quad, ps, grid_qc);
  }
  return {order_statistic(max_mc, permutation_order_index(B, alpha_mc)),
          order_statistic(max_qc, permutation_order_index(B, alpha_qc))};
}

double calibrate_permutation(const Dataset& ds, DetectorKind kind, Index varpi, int B, double alpha,
                             std::uint64_t seed) {
  if (B < 19) throw ConfigError("permutation calibration needs B >= 19");
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 0.5)");
  const auto grid = dyadic_grid(ds.n(), varpi);
  std::vector<double> maxima(static_cast<std::size_t>(B));
  for (Index b = 0; b < B; ++b) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    const auto order = rng.permutation(ds.n());
    maxima[b] = grid_max(kind, precompute(ds.permuted(order)), grid);
  }
  return order_statistic(std::move(maxima), permutation_order_index(B, alpha));
}

PluginEstimates plugin_estimates(const Dataset& ds) {
  PluginEstimates est;
  const Vector& y = ds.y();
  const double mean = y.mean();
  const double ss = (y.array() - mean).square().sum();
  est.psi_hat = std::sqrt(ss / static_cast<double>(ds.n() - 1));
  est.sigma_norm_hat = largest_gram_eigenvalue(ds.x()).value;
  return est;
}

PluginThresholds calibrate_plugin(const Dataset& ds, const PluginCalibration& plugin) {
  PluginThresholds out;
  out.estimates = plugin_estimates(ds);
  const double n = static_cast<double>(ds.n());
  const double p = static_cast<double>(ds.p());
  const double norm = out.estimates.sigma_norm_hat;
  const double psi = out.estimates.psi_hat;
  out.degenerate = !(norm > 0.0);
  out.zeta_mc = plugin.c_bar * std::sqrt(norm) * psi * std::sqrt(std::log(p * std::log(n)));
  out.zeta_qc = plugin.c * norm * psi * psi * std::sqrt(p * loglog_floor(ds.n()));
  return out;
}

DetectorConfig calibrate(const Dataset& ds, const DetectorConfig& cfg, Scanner target) {
  cfg.validate();
  DetectorConfig out = cfg;
  const Index wm = varpi_mc(cfg, ds.n(), ds.p());
  const Index wq = varpi_qc(cfg, ds.n());
  if (const auto* perm = std::get_if<PermutationCalibration>(&cfg.calibration)) {
    const double alpha = target == Scanner::OcScan ? perm->alpha / 2.0 : perm->alpha;
    switch (target) {
      case Scanner::McScan:
        out.zeta_mc = calibrate_permutation(ds, DetectorKind::Max, wm, perm->B, alpha, cfg.seed);
        break;
      case Scanner::QcScan:
        out.zeta_qc = calibrate_permutation(ds, DetectorKind::Quad, wq, perm->B, alpha, cfg.seed);
        break;
      case Scanner::OcScan: {
        const auto z = calibrate_permutation_joint(ds, wm, wq, perm->B, alpha, alpha, cfg.seed);
        out.zeta_mc = z.zeta_mc;
        out.zeta_qc = z.zeta_qc;
        break;
      }
    }
  } else if (const auto* plug = std::get_if<PluginCalibration>(&cfg.calibration)) {
    const auto z = calibrate_plugin(ds, *plug);
    out.zeta_mc = z.zeta_mc;
    out.zeta_qc = z.zeta_qc;
  }
  out.varpi_mc = wm;
  out.varpi_qc = wq;
  return out;
}

SearchOutcome run_mcscan(const PrefixSummaries& ps, const DetectorConfig& cfg) {
  const Index w = varpi_mc(cfg, ps.n(), ps.p());
  return optimistic_search([&ps](Index k) { return mcscan_stat(ps, k); }, ps.n(), cfg.zeta_mc, w);
}

SearchOutcome run_qcscan(const PrefixSummaries& ps, const DetectorConfig& cfg) {
  const Index w = varpi_qc(cfg, ps.n());
  return optimistic_search([&ps](Index k) { return qcscan_stat(ps, k); }, ps.n(), cfg.zeta_qc, w);
}

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::Mc:
      return "MC";
    case Choice::Qc:
      return "QC";
    case Choice::None:
      break;
  }
  return "NONE";
}

double loglog_floor(Index n) {
  return std::max(1.0, std::log(std::log(static_cast<double>(n))));
}

double c_mq_ratio(double tbar, double t, Index n, Index p) {
  if (!(t > 0.0)) return std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double quad_scale = t / std::sqrt(pd * loglog_floor(n));
  const double max_scale = tbar * tbar / std::log(pd * std::log(nd));
  return max_scale / quad_scale;
}

OcScanResult combine_ocscan(const PrefixSummaries& ps, const DetectorConfig& cfg, SearchOutcome mc,
                            SearchOutcome qc) {
  const Index n = ps.n();
  OcScanResult out;
  out.theta_mc = mc.theta_hat;
  out.theta_qc = qc.theta_hat;
  out.tbar_at_mc = mcscan_stat(ps, mc.theta_hat);  // 0 at k = n
  out.t_at_qc = qcscan_stat(ps, qc.theta_hat);
  const bool fire_mc = mc.theta_hat < n && out.tbar_at_mc > cfg.zeta_mc;
  const bool fire_qc = qc.theta_hat < n && out.t_at_qc > cfg.zeta_qc;
  out.q_hat = (fire_mc || fire_qc) ? 1 : 0;
  if (fire_mc && fire_qc) {
    out.c_mq = c_mq_ratio(out.tbar_at_mc, out.t_at_qc, n, ps.p());
    out.chosen = *out.c_mq > 1.0 ? Choice::Mc : Choice::Qc;
  } else if (fire_mc) {
    out.chosen = Choice::Mc;
  } else if (fire_qc) {
    out.chosen = Choice::Qc;
  } else {
    out.chosen = Choice::None;
  }
  switch (out.chosen) {
    case Choice::Mc:
      out.theta_oc = out.theta_mc;
      break;
    case Choice::Qc:
      out.theta_oc = out.theta_qc;
      break;
    case Choice::None:
      out.theta_oc = n;
      break;
  }
  out.mc = std::move(mc);
  out.qc = std::move(qc);
  return out;
}

OcScanResult run_ocscan(const PrefixSummaries& ps, const DetectorConfig& cfg) {
  return combine_ocscan(ps, cfg, run_mcscan(ps, cfg), run_qcscan(ps, cfg));
}

SignalStrengthEstimate estimate_v(const PrefixSummaries& ps, Index theta_qc) {
  const Index n = ps.n();
  if (theta_qc < 1 || theta_qc > n - 1) {
    std::ostringstream msg;
    msg << "estimate_v: theta " << theta_qc << " outside [1, " << n - 1 << "] (no change detected?)";
    throw std::out_of_range(msg.str());
  }
  const double nd = static_cast<double>(n);
  const double th = static_cast<double>(theta_qc);
  return {nd / (th * (nd - th)) * qcscan_stat(ps, theta_qc), theta_qc};
}

}  // namespace cpscan
