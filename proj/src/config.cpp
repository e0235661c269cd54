#include "cpscan/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace cpscan {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
T get_as(const json& j, std::string_view where, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + ": bad value for '" + key + "': " + e.what());
  }
}

template <class T>
void read_opt(const json& j, std::string_view where, const std::string& key, T& out) {
  if (j.contains(key)) out = get_as<T>(j, where, key);
}

template <class T>
void read_opt(const json& j, std::string_view where, const std::string& key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = get_as<T>(j, where, key);
}

Index read_index(const json& j, std::string_view where, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string(where) + ": '" + key + "' must be an integer");
  return v.get<Index>();
}

template <class T>
std::vector<T> read_list(const json& j, std::string_view where, const std::string& key) {
  const json& v = j.at(key);
  std::vector<T> out;
  try {
    if (v.is_array()) {
      for (const auto& e : v) out.push_back(e.get<T>());
    } else {
      out.push_back(v.get<T>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + ": bad value in '" + key + "': " + e.what());
  }
  if (out.empty()) throw ConfigError(std::string(where) + ": '" + key + "' must not be empty");
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

DetectorConfig detector_config_from_json(const json& j) {
  constexpr std::string_view where = "detector";
  check_keys(j, where, {"calibration", "B", "alpha", "c_bar", "c", "zeta_mc", "zeta_qc", "varpi_mc", "varpi_qc", "seed"});
  DetectorConfig cfg;
  const std::string calib = j.contains("calibration") ? get_as<std::string>(j, where, "calibration") : "perm";
  if (calib == "perm") {
    PermutationCalibration perm;
    read_opt(j, where, "B", perm.B);
    read_opt(j, where, "alpha", perm.alpha);
    cfg.calibration = perm;
  } else if (calib == "plugin") {
    PluginCalibration plug;
    read_opt(j, where, "c_bar", plug.c_bar);
    read_opt(j, where, "c", plug.c);
    cfg.calibration = plug;
  } else if (calib == "manual") {
    if (!j.contains("zeta_mc") || !j.contains("zeta_qc"))
      throw ConfigError("detector: manual calibration needs zeta_mc and zeta_qc");
    cfg.calibration = ManualCalibration{};
  } else {
    throw ConfigError("detector: unknown calibration '" + calib + "'");
  }
  read_opt(j, where, "zeta_mc", cfg.zeta_mc);
  read_opt(j, where, "zeta_qc", cfg.zeta_qc);
  if (j.contains("varpi_mc")) cfg.varpi_mc = read_index(j, where, "varpi_mc");
  if (j.contains("varpi_qc")) cfg.varpi_qc = read_index(j, where, "varpi_qc");
  read_opt(j, where, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

json to_json(const DetectorConfig& cfg) {
  json j;
  std::visit(
      [&j](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, PermutationCalibration>) {
          j["calibration"] = "perm";
          j["B"] = c.B;
          j["alpha"] = c.alpha;
        } else if constexpr (std::is_same_v<T, PluginCalibration>) {
          j["calibration"] = "plugin";
          j["c_bar"] = c.c_bar;
          j["c"] = c.c;
        } else {
          j["calibration"] = "manual";
        }
      },
      cfg.calibration);
  j["zeta_mc"] = cfg.zeta_mc;
  j["zeta_qc"] = cfg.zeta_qc;
  if (cfg.varpi_mc) j["varpi_mc"] = *cfg.varpi_mc;
  if (cfg.varpi_qc) j["varpi_qc"] = *cfg.varpi_qc;
  j["seed"] = cfg.seed;
  return j;
}

RefineOptions refine_options_from_json(const json& j) {
  constexpr std::string_view where = "refine";
  check_keys(j, where, {"c_lambda", "lambda", "varpi_r", "abs", "standardize", "tol", "max_sweeps"});
  RefineOptions opts;
  read_opt(j, where, "c_lambda", opts.c_lambda);
  read_opt(j, where, "lambda", opts.lambda);
  if (j.contains("varpi_r")) opts.varpi_r = read_index(j, where, "varpi_r");
  read_opt(j, where, "abs", opts.use_abs);
  read_opt(j, where, "standardize", opts.standardize);
  read_opt(j, where, "tol", opts.lasso.tol);
  read_opt(j, where, "max_sweeps", opts.lasso.max_sweeps);
  if (!(opts.c_lambda > 0.0)) throw ConfigError("refine: c_lambda must be positive");
  if (opts.lambda && !(*opts.lambda > 0.0)) throw ConfigError("refine: lambda must be positive");
  if (opts.varpi_r && *opts.varpi_r < 1) throw ConfigError("refine: varpi_r must be >= 1");
  if (!(opts.lasso.tol > 0.0) || opts.lasso.max_sweeps < 1) throw ConfigError("refine: bad solver settings");
  return opts;
}

ScenarioSpec scenario_from_json(const json& j) {
  constexpr std::string_view where = "scenario";
  check_keys(j, where, {"scenario", "n", "p", "theta", "sigma", "rho", "gamma", "nu", "sparsity_mode", "s", "r", "seed"});
  ScenarioSpec spec;
  if (j.contains("scenario")) spec.scenario = parse_scenario(get_as<std::string>(j, where, "scenario"));
  if (j.contains("n")) spec.n = read_index(j, where, "n");
  if (j.contains("p")) spec.p = read_index(j, where, "p");
  if (j.contains("theta")) {
    spec.theta = read_index(j, where, "theta");
  } else {
    spec.theta = spec.scenario == ScenarioKind::M2 ? std::min<Index>(75, spec.n) : spec.n / 4;
  }
  read_opt(j, where, "sigma", spec.sigma);
  read_opt(j, where, "rho", spec.rho);
  read_opt(j, where, "gamma", spec.gamma);
  read_opt(j, where, "nu", spec.nu);
  if (j.contains("sparsity_mode")) spec.sparsity_mode = parse_sparsity(get_as<std::string>(j, where, "sparsity_mode"));
  if (j.contains("s")) spec.s = read_index(j, where, "s");
  if (j.contains("r")) spec.r = read_index(j, where, "r");
  read_opt(j, where, "seed", spec.seed);
  spec.validate();
  return spec;
}

json to_json(const ScenarioSpec& spec) {
  return {{"scenario", to_string(spec.scenario)},
          {"n", spec.n},
          {"p", spec.p},
          {"theta", spec.theta},
          {"sigma", spec.sigma},
          {"rho", spec.rho},
          {"gamma", spec.gamma},
          {"nu", spec.nu},
          {"sparsity_mode", to_string(spec.sparsity_mode)},
          {"s", spec.s},
          {"r", spec.rank()},
          {"seed", spec.seed}};
}

ExperimentPlan plan_from_json(const json& j) {
  constexpr std::string_view where = "plan";
  check_keys(j, where, {"scenario", "sparsity_mode", "grid", "theta", "methods", "repetitions", "seed", "detector",
                        "refine", "output", "raw_output", "threads"});
  ExperimentPlan plan;
  if (j.contains("scenario")) plan.scenario = parse_scenario(get_as<std::string>(j, where, "scenario"));
  if (j.contains("sparsity_mode")) plan.sparsity_mode = parse_sparsity(get_as<std::string>(j, where, "sparsity_mode"));
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    constexpr std::string_view gw = "plan.grid";
    check_keys(g, gw, {"n", "p", "s", "rho", "gamma", "nu", "r"});
    if (g.contains("n")) plan.grid.n = read_list<Index>(g, gw, "n");
    if (g.contains("p")) plan.grid.p = read_list<Index>(g, gw, "p");
    if (g.contains("s")) plan.grid.s = read_list<Index>(g, gw, "s");
    if (g.contains("rho")) plan.grid.rho = read_list<double>(g, gw, "rho");
    if (g.contains("gamma")) plan.grid.gamma = read_list<double>(g, gw, "gamma");
    if (g.contains("nu")) plan.grid.nu = read_list<double>(g, gw, "nu");
    if (g.contains("r")) plan.grid.r = read_list<Index>(g, gw, "r");
  }
  if (j.contains("theta")) plan.theta = read_index(j, where, "theta");
  if (j.contains("methods")) {
    plan.methods.clear();
    for (const auto& m : read_list<std::string>(j, where, "methods")) plan.methods.push_back(parse_method(m));
  }
  read_opt(j, where, "repetitions", plan.repetitions);
  read_opt(j, where, "seed", plan.seed);
  if (j.contains("detector")) plan.detector = detector_config_from_json(j.at("detector"));
  if (j.contains("refine")) plan.refine = refine_options_from_json(j.at("refine"));
  if (j.contains("output")) plan.output = get_as<std::string>(j, where, "output");
  if (j.contains("raw_output")) plan.raw_output = get_as<std::string>(j, where, "raw_output");
  read_opt(j, where, "threads", plan.threads);
  plan.validate();
  return plan;
}

json to_json(const SearchOutcome& outcome, bool with_trace) {
  json j = {{"theta_hat", outcome.theta_hat}, {"q_hat", outcome.q_hat}};
  if (with_trace) j["trace"] = to_json(outcome.trace);
  return j;
}

json to_json(const OcScanResult& result, bool with_trace) {
  json j = {{"theta_oc", result.theta_oc},
            {"q_hat", result.q_hat},
            {"chosen", to_string(result.chosen)},
            {"c_mq", nullptr},
            {"theta_mc", result.theta_mc},
            {"theta_qc", result.theta_qc},
            {"tbar_at_mc", result.tbar_at_mc},
            {"t_at_qc", result.t_at_qc}};
  if (result.c_mq) {
    j["c_mq"] = finite_or_null(*result.c_mq);
    if (!std::isfinite(*result.c_mq)) j["c_mq_infinite"] = true;
  }
  if (with_trace) j["traces"] = {{"mc", to_json(result.mc.trace)}, {"qc", to_json(result.qc.trace)}};
  return j;
}

json to_json(const OcScanRResult& result, bool with_trace) {
  json j = to_json(result.oc, with_trace);
  j["theta_r"] = result.theta_r;
  j["lambda"] = result.lambda;
  j["fallback"] = result.fallback;
  Index nonzeros = 0;
  for (Index i = 0; i < result.lasso.delta_hat.size(); ++i) nonzeros += result.lasso.delta_hat(i) != 0.0;
  j["lasso"] = {{"iterations", result.lasso.iterations},
                {"converged", result.lasso.converged},
                {"kkt_gap", result.lasso.kkt_gap},
                {"objective", result.lasso.objective},
                {"nonzeros", nonzeros}};
  if (result.refinement) {
    j["varpi_r"] = result.refinement->varpi_r;
    if (with_trace) j["refinement_stats"] = result.refinement->projected_stats;
  }
  return j;
}

std::string delta_csv(const Vector& delta_hat) {
  std::string out = "index,value\n";
  for (Index i = 0; i < delta_hat.size(); ++i) {
    if (delta_hat(i) == 0.0) continue;
    out += std::to_string(i);
    out += ',';
    out += format_double(delta_hat(i));
    out += '\n';
  }
  return out;
}

}  // namespace cpscan
