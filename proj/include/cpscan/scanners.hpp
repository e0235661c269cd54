#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

#include "cpscan/dataset.hpp"
#include "cpscan/detectors.hpp"
#include "cpscan/search.hpp"

namespace cpscan {

/// Plug-in thresholds zeta_Mc = c_bar |Sigma|^{1/2} Psi sqrt(log(p log n)) and
/// zeta_Qc = c |Sigma| Psi^2 sqrt(p log log n) with estimated |Sigma| and Psi.
struct PluginCalibration {
  double c_bar = 2.0;
  double c = 2.0;
};

/// Thresholds from the (1 - alpha) quantile of grid maxima over B random
/// time permutations.
struct PermutationCalibration {
  int B = 99;
  double alpha = 0.05;
};

/// Thresholds taken verbatim from DetectorConfig::zeta_mc / zeta_qc.
struct ManualCalibration {};

using Calibration = std::variant<PluginCalibration, PermutationCalibration, ManualCalibration>;

struct DetectorConfig {
  double zeta_mc = 0.0;
  double zeta_qc = 0.0;
  std::optional<Index> varpi_mc;  // default_varpi_mc when unset
  std::optional<Index> varpi_qc;  // default_varpi_qc when unset
  Calibration calibration = PermutationCalibration{};
  std::uint64_t seed = 0;

  /// Throws ConfigError on non-finite thresholds, trimming < 1, B < 19 or
  /// alpha outside (0, 0.5).
  void validate() const;
};

/// ceil(log(p log n)), at least 2 and at most n/4.
Index default_varpi_mc(Index n, Index p);
/// ceil(log((log n)^3)), at least 2 and at most n/4.
Index default_varpi_qc(Index n);

Index varpi_mc(const DetectorConfig& cfg, Index n, Index p);
Index varpi_qc(const DetectorConfig& cfg, Index n);

enum class Scanner { McScan, QcScan, OcScan };

/// Returns `cfg` with zeta_mc / zeta_qc filled in according to its
/// calibration policy. Under permutation calibration for OcScan each
/// component is calibrated at alpha/2 (Bonferroni over the union rule); a
/// single scanner uses alpha. Manual calibration returns cfg unchanged.
DetectorConfig calibrate(const Dataset& ds, const DetectorConfig& cfg, Scanner target);

/// Permutation threshold for one detector kind. Permutation b uses the RNG
/// stream derive_seed(seed, {b}); the result is the ceil((1-alpha)(B+1))-th
/// smallest of the B permuted grid maxima (clamped to the B-th).
double calibrate_permutation(const Dataset& ds, DetectorKind kind, Index varpi, int B, double alpha,
                             std::uint64_t seed);

struct PermutationThresholds {
  double zeta_mc;
  double zeta_qc;
};

/// Both thresholds from one set of permutations.
PermutationThresholds calibrate_permutation_joint(const Dataset& ds, Index varpi_mc, Index varpi_qc, int B,
                                                  double alpha_mc, double alpha_qc, std::uint64_t seed);

/// Index (1-based) of the order statistic used as threshold.
Index permutation_order_index(int B, double alpha);

struct PluginEstimates {
  double psi_hat = 0.0;         // sample standard deviation of Y
  double sigma_norm_hat = 0.0;  // largest eigenvalue of X^T X / n
};

PluginEstimates plugin_estimates(const Dataset& ds);

struct PluginThresholds {
  double zeta_mc = 0.0;
  double zeta_qc = 0.0;
  PluginEstimates estimates;
  bool degenerate = false;  // |Sigma|^ = 0: thresholds are 0 and should not be trusted
};

PluginThresholds calibrate_plugin(const Dataset& ds, const PluginCalibration& plugin);

/// Algorithm-1 search over mcscan_stat with (zeta_mc, varpi_mc).
SearchOutcome run_mcscan(const PrefixSummaries& ps, const DetectorConfig& cfg);
/// Algorithm-1 search over qcscan_stat with (zeta_qc, varpi_qc).
SearchOutcome run_qcscan(const PrefixSummaries& ps, const DetectorConfig& cfg);

enum class Choice { Mc, Qc, None };
std::string_view to_string(Choice c);

struct OcScanResult {
  Index theta_oc = 0;
  int q_hat = 0;
  Index theta_mc = 0;
  Index theta_qc = 0;
  double tbar_at_mc = 0.0;  // T-bar at theta_mc, 0 when theta_mc = n
  double t_at_qc = 0.0;     // T at theta_qc, 0 when theta_qc = n
  std::optional<double> c_mq;  // only when both detectors fire
  Choice chosen = Choice::None;
  SearchOutcome mc;
  SearchOutcome qc;
};

/// (log log n) floored at 1.
double loglog_floor(Index n);

/// C_{M/Q} = (T / sqrt(p loglog n))^{-1} * Tbar^2 / log(p log n). A
/// non-positive T yields +infinity (McScan preferred).
double c_mq_ratio(double tbar, double t, Index n, Index p);

/// Combines the two searches: the sole firing detector wins; when both fire,
/// McScan is chosen iff C_{M/Q} > 1; when neither fires theta = n.
OcScanResult run_ocscan(const PrefixSummaries& ps, const DetectorConfig& cfg);

/// Combination rule applied to precomputed component outcomes.
OcScanResult combine_ocscan(const PrefixSummaries& ps, const DetectorConfig& cfg, SearchOutcome mc,
                            SearchOutcome qc);

struct SignalStrengthEstimate {
  double v_hat = 0.0;  // unclamped, may be negative
  Index theta_used = 0;
};

/// V-hat = n / (theta (n - theta)) * T_theta. Rejects theta outside [1, n-1].
SignalStrengthEstimate estimate_v(const PrefixSummaries& ps, Index theta_qc);

}  // namespace cpscan
