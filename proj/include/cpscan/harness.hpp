#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpscan/diff_estimation.hpp"
#include "cpscan/scanners.hpp"
#include "cpscan/simgen.hpp"

namespace cpscan {

enum class Method { McScan, QcScan, OcScan, OcScanR };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

/// Cartesian grid of scenario coordinates; each list must be non-empty.
struct ScenarioGrid {
  std::vector<Index> n{300};
  std::vector<Index> p{900};
  std::vector<Index> s{1};
  std::vector<double> rho{2.0};
  std::vector<double> gamma{0.0};
  std::vector<double> nu{0.0};
  std::vector<Index> r{0};
};

struct ExperimentPlan {
  ScenarioKind scenario = ScenarioKind::M1;
  SparsityMode sparsity_mode = SparsityMode::Standard;
  ScenarioGrid grid;
  std::optional<Index> theta;  // scenario default (M1: n/4, M2: 75) when unset
  std::vector<Method> methods{Method::McScan, Method::QcScan, Method::OcScan, Method::OcScanR};
  int repetitions = 200;
  std::uint64_t seed = 1;
  DetectorConfig detector;  // calibration policy; thresholds recomputed per repetition
  RefineOptions refine;
  std::filesystem::path output = "metrics.csv";
  std::optional<std::filesystem::path> raw_output;  // one row per repetition x method
  std::optional<int> threads;

  void validate() const;
};

/// One grid cell (a fully specified scenario minus the seed).
struct CellCoordinates {
  Index n, p, s, r, theta;
  double rho, gamma, nu;
};

struct MetricsRow {
  std::string scenario;
  CellCoordinates cell;
  Method method;
  int repetitions = 0;  // repetitions that ran successfully
  int failed = 0;       // repetitions excluded because of an error
  double median_error = 0.0;
  double q25_error = 0.0;
  double q75_error = 0.0;
  double iqr_error = 0.0;
  double detection_rate = 0.0;
  double median_time_us = 0.0;
  std::string error_tag;  // first error message when failed > 0
};

struct RepetitionRecord {
  Index cell = 0;
  int repetition = 0;
  Method method = Method::OcScan;
  Index theta_true = 0;
  Index theta_hat = 0;
  int q_hat = 0;
  double time_us = 0.0;
  std::string error;
};

struct ExperimentResult {
  std::vector<CellCoordinates> cells;
  std::vector<MetricsRow> rows;
  std::vector<RepetitionRecord> records;
};

/// Expands the plan's grid into cells, in row-major order over
/// (n, p, s, rho, gamma, nu, r).
std::vector<CellCoordinates> expand_grid(const ExperimentPlan& plan);

ScenarioSpec cell_spec(const ExperimentPlan& plan, const CellCoordinates& cell, std::uint64_t seed);

/// Repetition seed: derive_seed(plan.seed, {cell, repetition}).
std::uint64_t repetition_seed(const ExperimentPlan& plan, Index cell, int repetition);

/// For every cell and repetition: generate, calibrate once (OcScan
/// components), run every method, record |theta_hat - theta| with theta = n
/// for no change. Aggregation is independent of scheduling.
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// Median and quartiles use linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// CSV with one MetricsRow per line. `with_timing = false` drops the
/// median_time_us column (used for byte-level reproducibility checks).
std::string metrics_csv(const std::vector<MetricsRow>& rows, bool with_timing = true);
std::string records_csv(const std::vector<RepetitionRecord>& records, bool with_timing = true);

/// Runs the experiment and writes plan.output (and raw_output) atomically.
ExperimentResult run_experiment_to_files(const ExperimentPlan& plan);

struct BenchSize {
  Index n;
  Index p;
};

struct BenchEntry {
  BenchSize size;
  double precompute_us = 0.0;  // median over reps
  double detect_us = 0.0;      // median over reps, OcScan after precompute
  int detect_inner_loops = 1;  // repeats per timed sample
  int reps = 0;
};

struct ScalingCheck {
  std::string label;
  double ratio = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool pass = false;
};

struct BenchReport {
  std::vector<BenchEntry> entries;
  std::vector<ScalingCheck> checks;
};

/// Times precompute and post-precompute OcScan for each size, cycling through
/// the sizes once per repetition. Samples shorter than `min_sample_us` are
/// repeated in an inner loop until they are not.
std::vector<BenchEntry> run_bench(const std::vector<BenchSize>& sizes, int reps, double min_sample_us = 20000.0,
                                  std::uint64_t seed = 2024);

/// Doubling-ratio checks over entries, for every pair that doubles exactly
/// one of n or p: precompute ratio in [1.6, 2.6]; detection ratio <= 1.5
/// when n doubles, in [1.6, 2.6] when p doubles.
std::vector<ScalingCheck> scaling_checks(const std::vector<BenchEntry>& entries);

std::string bench_json(const BenchReport& report);

}  // namespace cpscan
