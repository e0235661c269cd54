#include "cpscan/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cpscan/config.hpp"

namespace cpscan {

namespace {

void emit(const std::string& text, const std::optional<std::string>& path, std::ostream& out) {
  if (path) {
    write_file_atomic(*path, text);
  } else {
    out << text;
  }
}

struct DetectArgs {
  std::string data;
  std::string method = "oc";
  std::string calib = "perm";
  std::optional<double> alpha;
  std::optional<int> B;
  std::optional<std::uint64_t> seed;
  std::optional<double> zeta_mc, zeta_qc;
  std::optional<Index> varpi_mc, varpi_qc, varpi_r;
  std::optional<double> lambda, c_lambda;
  std::optional<std::string> config;
  std::optional<std::string> out, delta_out;
  bool trace = false;
  bool use_abs = false;
  bool standardize = false;
  bool header = false;
};

int run_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
  DetectorConfig cfg;
  if (a.config) cfg = detector_config_from_json(read_json_file(*a.config));
  if (a.calib == "perm") {
    PermutationCalibration perm;
    if (const auto* prev = std::get_if<PermutationCalibration>(&cfg.calibration)) perm = *prev;
    if (a.B) perm.B = *a.B;
    if (a.alpha) perm.alpha = *a.alpha;
    cfg.calibration = perm;
  } else if (a.calib == "plugin") {
    PluginCalibration plug;
    if (const auto* prev = std::get_if<PluginCalibration>(&cfg.calibration)) plug = *prev;
    cfg.calibration = plug;
  } else {
    cfg.calibration = ManualCalibration{};
  }
  if (a.zeta_mc) cfg.zeta_mc = *a.zeta_mc;
  if (a.zeta_qc) cfg.zeta_qc = *a.zeta_qc;
  if (a.varpi_mc) cfg.varpi_mc = *a.varpi_mc;
  if (a.varpi_qc) cfg.varpi_qc = *a.varpi_qc;
  if (a.seed) cfg.seed = *a.seed;
  if (a.calib == "manual" && !(a.zeta_mc || a.zeta_qc || a.config))
    throw ConfigError("--calib manual needs --zeta-mc / --zeta-qc or --config");

  const Dataset ds = read_csv_file(a.data, a.header);
  const Scanner target = a.method == "mc" ? Scanner::McScan : a.method == "qc" ? Scanner::QcScan : Scanner::OcScan;
  if (a.calib == "plugin" && calibrate_plugin(ds, PluginCalibration{}).degenerate)
    err << "warning: estimated covariance norm is zero; plug-in thresholds are degenerate\n";
  const DetectorConfig calibrated = calibrate(ds, cfg, target);
  const PrefixSummaries ps = precompute(ds);

  nlohmann::json result;
  if (a.method == "mc") {
    result = to_json(run_mcscan(ps, calibrated), a.trace);
  } else if (a.method == "qc") {
    result = to_json(run_qcscan(ps, calibrated), a.trace);
  } else {
    OcScanResult oc = run_ocscan(ps, calibrated);
    if (a.method == "oc") {
      result = to_json(oc, a.trace);
    } else if (oc.q_hat == 0) {
      result = to_json(oc, a.trace);
      result["theta_r"] = ds.n();
    } else {
      RefineOptions opts;
      if (a.lambda) opts.lambda = *a.lambda;
      if (a.c_lambda) opts.c_lambda = *a.c_lambda;
      if (a.varpi_r) opts.varpi_r = *a.varpi_r;
      opts.use_abs = a.use_abs;
      opts.standardize = a.standardize;
      opts.keep_trace = a.trace;
      const OcScanRResult r = refine_ocscan(ds, ps, std::move(oc), opts);
      result = to_json(r, a.trace);
      if (a.delta_out) write_file_atomic(*a.delta_out, delta_csv(r.lasso.delta_hat));
    }
  }
  result["method"] = a.method;
  result["n"] = ds.n();
  result["p"] = ds.p();
  result["detector"] = to_json(calibrated);
  emit(result.dump(2) + "\n", a.out, out);
  return 0;
}

std::vector<BenchSize> parse_sizes(const std::string& text) {
  std::vector<BenchSize> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(item);
      sizes.push_back({std::stol(item.substr(0, x)), std::stol(item.substr(x + 1))});
    } catch (const std::exception&) {
      throw ConfigError("bad size '" + item + "', expected NxP");
    }
    if (sizes.back().n < 16 || sizes.back().p < 1) throw ConfigError("bench sizes need n >= 16 and p >= 1");
  }
  if (sizes.empty()) throw ConfigError("no bench sizes given");
  return sizes;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"High-dimensional regression change-point scanning"};
  app.name("cpscan");
  app.require_subcommand(1);

  DetectArgs d;
  auto* detect = app.add_subcommand("detect", "Detect a change point in a CSV dataset");
  detect->add_option("data", d.data, "Dataset CSV (Y, x1..xp per row)")->required();
  detect->add_option("--method", d.method, "mc, qc, oc or ocr")->check(CLI::IsMember({"mc", "qc", "oc", "ocr"}));
  detect->add_option("--calib", d.calib, "perm, plugin or manual")->check(CLI::IsMember({"perm", "plugin", "manual"}));
  detect->add_option("--alpha", d.alpha, "Permutation test level");
  detect->add_option("--B", d.B, "Number of permutations");
  detect->add_option("--seed", d.seed, "Permutation seed");
  detect->add_option("--zeta-mc", d.zeta_mc, "McScan threshold (manual)");
  detect->add_option("--zeta-qc", d.zeta_qc, "QcScan threshold (manual)");
  detect->add_option("--varpi-mc", d.varpi_mc, "McScan trimming");
  detect->add_option("--varpi-qc", d.varpi_qc, "QcScan trimming");
  detect->add_option("--varpi-r", d.varpi_r, "Refinement trimming");
  detect->add_option("--lambda", d.lambda, "Lasso penalty (overrides the plug-in)");
  detect->add_option("--c-lambda", d.c_lambda, "Multiplier of the plug-in Lasso penalty");
  detect->add_option("--config", d.config, "Detector JSON config");
  detect->add_option("--out", d.out, "Write the JSON result here");
  detect->add_option("--delta-out", d.delta_out, "Write the Lasso estimate (ocr) as CSV");
  detect->add_flag("--trace", d.trace, "Include search traces");
  detect->add_flag("--abs", d.use_abs, "Refine on the absolute projected statistic");
  detect->add_flag("--standardize", d.standardize, "Scale columns before the Lasso");
  detect->add_flag("--header", d.header, "Skip the first CSV line");

  std::string spec_path;
  std::optional<std::string> sim_out;
  std::optional<std::uint64_t> sim_seed;
  bool sim_header = false;
  auto* simulate = app.add_subcommand("simulate", "Generate a dataset from a scenario JSON");
  simulate->add_option("spec", spec_path, "Scenario JSON")->required();
  simulate->add_option("--out", sim_out, "Dataset CSV path (stdout when omitted)");
  simulate->add_option("--seed", sim_seed, "Override the scenario seed");
  simulate->add_flag("--header", sim_header, "Write a header line");

  std::string plan_path;
  std::optional<std::string> exp_out, exp_raw;
  std::optional<std::uint64_t> exp_seed;
  std::optional<int> exp_threads;
  auto* experiment = app.add_subcommand("experiment", "Run a simulation plan and write metrics CSV");
  experiment->add_option("plan", plan_path, "Plan JSON")->required();
  experiment->add_option("--seed", exp_seed, "Override the plan seed");
  experiment->add_option("--out", exp_out, "Override the metrics CSV path");
  experiment->add_option("--raw-out", exp_raw, "Also write per-repetition records");
  experiment->add_option("--threads", exp_threads, "Worker threads");

  std::string sizes_text = "16384x64,32768x64,16384x128";
  int bench_reps = 7;
  std::optional<std::string> bench_out;
  auto* bench = app.add_subcommand("bench", "Time precompute and detection");
  bench->add_option("--sizes", sizes_text, "Comma-separated NxP list");
  bench->add_option("--reps", bench_reps, "Timed repetitions per size");
  bench->add_option("--out", bench_out, "Write the JSON report here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (detect->parsed()) return run_detect(d, out, err);
    if (simulate->parsed()) {
      ScenarioSpec spec = scenario_from_json(read_json_file(spec_path));
      if (sim_seed) spec.seed = *sim_seed;
      const GeneratedSample sample = generate(spec);
      std::ostringstream csv;
      write_csv(csv, sample.data, sim_header);
      emit(csv.str(), sim_out, out);
      return 0;
    }
    if (experiment->parsed()) {
      ExperimentPlan plan = plan_from_json(read_json_file(plan_path));
      if (exp_seed) plan.seed = *exp_seed;
      if (exp_out) plan.output = *exp_out;
      if (exp_raw) plan.raw_output = *exp_raw;
      if (exp_threads) plan.threads = *exp_threads;
      const ExperimentResult result = run_experiment_to_files(plan);
      err << "wrote " << result.rows.size() << " metrics rows to " << plan.output.string() << "\n";
      return 0;
    }
    if (bench->parsed()) {
      BenchReport report;
      report.entries = run_bench(parse_sizes(sizes_text), bench_reps);
      report.checks = scaling_checks(report.entries);
      emit(bench_json(report), bench_out, out);
      return 0;
    }
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace cpscan
