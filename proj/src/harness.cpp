#include "cpscan/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "cpscan/parallel.hpp"

namespace cpscan {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::McScan:
      return "McScan";
    case Method::QcScan:
      return "QcScan";
    case Method::OcScan:
      return "OcScan";
    case Method::OcScanR:
      break;
  }
  return "OcScan.R";
}

Method parse_method(std::string_view s) {
  if (s == "mc" || s == "McScan" || s == "MCSCAN") return Method::McScan;
  if (s == "qc" || s == "QcScan" || s == "QCSCAN") return Method::QcScan;
  if (s == "oc" || s == "OcScan" || s == "OCSCAN") return Method::OcScan;
  if (s == "ocr" || s == "OcScan.R" || s == "OCSCAN_R") return Method::OcScanR;
  throw ConfigError("unknown method '" + std::string(s) + "'");
}

void ExperimentPlan::validate() const {
  if (repetitions < 1) throw ConfigError("plan: repetitions must be >= 1");
  if (grid.n.empty() || grid.p.empty() || grid.s.empty() || grid.rho.empty() || grid.gamma.empty() ||
      grid.nu.empty() || grid.r.empty())
    throw ConfigError("plan: every grid list must be non-empty");
  if (methods.empty()) throw ConfigError("plan: no methods");
  if (threads && *threads < 1) throw ConfigError("plan: threads must be >= 1");
  detector.validate();
}

std::vector<CellCoordinates> expand_grid(const ExperimentPlan& plan) {
  std::vector<CellCoordinates> cells;
  for (Index n : plan.grid.n)
    for (Index p : plan.grid.p)
      for (Index s : plan.grid.s)
        for (double rho : plan.grid.rho)
          for (double gamma : plan.grid.gamma)
            for (double nu : plan.grid.nu)
              for (Index r : plan.grid.r) {
                CellCoordinates c{n, p, s, r == 0 ? p : r, plan.theta.value_or(n / 4), rho, gamma, nu};
                cell_spec(plan, c, 0).validate();
                cells.push_back(c);
              }
  return cells;
}

ScenarioSpec cell_spec(const ExperimentPlan& plan, const CellCoordinates& cell, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.scenario = plan.scenario;
  spec.sparsity_mode = plan.sparsity_mode;
  spec.n = cell.n;
  spec.p = cell.p;
  spec.s = cell.s;
  spec.r = cell.r;
  spec.theta = cell.theta;
  spec.rho = cell.rho;
  spec.gamma = cell.gamma;
  spec.nu = cell.nu;
  spec.seed = seed;
  return spec;
}

std::uint64_t repetition_seed(const ExperimentPlan& plan, Index cell, int repetition) {
  return derive_seed(plan.seed, {static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(repetition)});
}

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

bool uses_ocscan(const std::vector<Method>& methods) {
  return std::any_of(methods.begin(), methods.end(),
                     [](Method m) { return m == Method::OcScan || m == Method::OcScanR; });
}

// Runs every method of the plan on one repetition; fills `out` (one record per method).
void run_repetition(const ExperimentPlan& plan, const CellCoordinates& cell, Index cell_index, int rep,
                    std::vector<RepetitionRecord>& out) {
  for (std::size_t m = 0; m < plan.methods.size(); ++m) {
    out[m].cell = cell_index;
    out[m].repetition = rep;
    out[m].method = plan.methods[m];
  }
  try {
    const std::uint64_t seed = repetition_seed(plan, cell_index, rep);
    const GeneratedSample sample = generate(cell_spec(plan, cell, seed));
    const Dataset& ds = sample.data;

    DetectorConfig base = plan.detector;
    base.seed = derive_seed(seed, {7});
    // OcScan components are calibrated once (Bonferroni split) and reused for
    // the McScan / QcScan rows; without OcScan each scanner gets the full level.
    DetectorConfig cfg_mc, cfg_qc;
    if (uses_ocscan(plan.methods)) {
      cfg_mc = cfg_qc = calibrate(ds, base, Scanner::OcScan);
    } else {
      cfg_mc = calibrate(ds, base, Scanner::McScan);
      cfg_qc = calibrate(ds, base, Scanner::QcScan);
    }

    auto t0 = Clock::now();
    const PrefixSummaries ps = precompute(ds);
    const double pre_us = micros_since(t0);

    t0 = Clock::now();
    SearchOutcome mc = run_mcscan(ps, cfg_mc);
    const double mc_us = micros_since(t0);
    t0 = Clock::now();
    SearchOutcome qc = run_qcscan(ps, cfg_qc);
    const double qc_us = micros_since(t0);

    std::optional<OcScanResult> oc;
    double oc_us = 0.0;
    std::optional<OcScanRResult> ocr;
    double ocr_us = 0.0;
    const Index theta = sample.truth.theta();

    for (std::size_t m = 0; m < plan.methods.size(); ++m) {
      RepetitionRecord& rec = out[m];
      rec.theta_true = theta;
      try {
        switch (plan.methods[m]) {
          case Method::McScan:
            rec.theta_hat = mc.theta_hat;
            rec.q_hat = mc.q_hat;
            rec.time_us = pre_us + mc_us;
            break;
          case Method::QcScan:
            rec.theta_hat = qc.theta_hat;
            rec.q_hat = qc.q_hat;
            rec.time_us = pre_us + qc_us;
            break;
          case Method::OcScan:
          case Method::OcScanR: {
            if (!oc) {
              t0 = Clock::now();
              oc = combine_ocscan(ps, cfg_mc, mc, qc);
              oc_us = mc_us + qc_us + micros_since(t0);
            }
            if (plan.methods[m] == Method::OcScan) {
              rec.theta_hat = oc->theta_oc;
              rec.q_hat = oc->q_hat;
              rec.time_us = pre_us + oc_us;
              break;
            }
            if (oc->q_hat == 0) {
              rec.theta_hat = ds.n();
              rec.q_hat = 0;
              rec.time_us = pre_us + oc_us;
              break;
            }
            if (!ocr) {
              t0 = Clock::now();
              ocr = refine_ocscan(ds, ps, *oc, plan.refine);
              ocr_us = micros_since(t0);
            }
            rec.theta_hat = ocr->theta_r;
            rec.q_hat = 1;
            rec.time_us = pre_us + oc_us + ocr_us;
            break;
          }
        }
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  } catch (const std::exception& e) {
    for (auto& rec : out) rec.error = e.what();
  }
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return s;
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  ExperimentResult result;
  result.cells = expand_grid(plan);
  const Index reps = plan.repetitions;
  const Index n_methods = static_cast<Index>(plan.methods.size());
  const Index jobs = static_cast<Index>(result.cells.size()) * reps;

  std::vector<std::vector<RepetitionRecord>> slots(static_cast<std::size_t>(jobs),
                                                   std::vector<RepetitionRecord>(n_methods));
  parallel_for(
      jobs,
      [&](Index job) {
        const Index cell = job / reps;
        run_repetition(plan, result.cells[cell], cell, static_cast<int>(job % reps), slots[job]);
      },
      plan.threads.value_or(worker_count()));

  for (Index cell = 0; cell < static_cast<Index>(result.cells.size()); ++cell) {
    for (Index m = 0; m < n_methods; ++m) {
      MetricsRow row;
      row.scenario = std::string(to_string(plan.scenario));
      row.cell = result.cells[cell];
      row.method = plan.methods[m];
      std::vector<double> errors, times;
      int detected = 0;
      for (Index rep = 0; rep < reps; ++rep) {
        const RepetitionRecord& rec = slots[cell * reps + rep][m];
        result.records.push_back(rec);
        if (!rec.error.empty()) {
          if (row.failed == 0) row.error_tag = rec.error;
          ++row.failed;
          continue;
        }
        errors.push_back(static_cast<double>(std::abs(rec.theta_hat - rec.theta_true)));
        times.push_back(rec.time_us);
        detected += rec.q_hat;
      }
      row.repetitions = static_cast<int>(errors.size());
      if (!errors.empty()) {
        row.median_error = quantile(errors, 0.5);
        row.q25_error = quantile(errors, 0.25);
        row.q75_error = quantile(errors, 0.75);
        row.iqr_error = row.q75_error - row.q25_error;
        row.detection_rate = static_cast<double>(detected) / static_cast<double>(errors.size());
        row.median_time_us = quantile(times, 0.5);
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows, bool with_timing) {
  std::ostringstream out;
  out << "scenario,n,p,s,r,theta,rho,gamma,nu,method,repetitions,failed,median_error,q25_error,q75_error,"
         "iqr_error,detection_rate";
  if (with_timing) out << ",median_time_us";
  out << ",error_tag\n";
  for (const auto& row : rows) {
    const auto& c = row.cell;
    out << row.scenario << ',' << c.n << ',' << c.p << ',' << c.s << ',' << c.r << ',' << c.theta << ','
        << format_double(c.rho) << ',' << format_double(c.gamma) << ',' << format_double(c.nu) << ','
        << to_string(row.method) << ',' << row.repetitions << ',' << row.failed << ','
        << format_double(row.median_error) << ',' << format_double(row.q25_error) << ','
        << format_double(row.q75_error) << ',' << format_double(row.iqr_error) << ','
        << format_double(row.detection_rate);
    if (with_timing) out << ',' << format_double(row.median_time_us);
    out << ',' << csv_safe(row.error_tag) << '\n';
  }
  return out.str();
}

std::string records_csv(const std::vector<RepetitionRecord>& records, bool with_timing) {
  std::ostringstream out;
  out << "cell,repetition,method,theta_true,theta_hat,q_hat";
  if (with_timing) out << ",time_us";
  out << ",error\n";
  for (const auto& r : records) {
    out << r.cell << ',' << r.repetition << ',' << to_string(r.method) << ',' << r.theta_true << ','
        << r.theta_hat << ',' << r.q_hat;
    if (with_timing) out << ',' << format_double(r.time_us);
    out << ',' << csv_safe(r.error) << '\n';
  }
  return out.str();
}

ExperimentResult run_experiment_to_files(const ExperimentPlan& plan) {
  ExperimentResult result = run_experiment(plan);
  write_file_atomic(plan.output, metrics_csv(result.rows));
  if (plan.raw_output) write_file_atomic(*plan.raw_output, records_csv(result.records));
  return result;
}

}  // namespace cpscan
