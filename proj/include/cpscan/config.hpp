#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "cpscan/diff_estimation.hpp"
#include "cpscan/harness.hpp"
#include "cpscan/scanners.hpp"
#include "cpscan/simgen.hpp"

namespace cpscan {

// JSON schemas are documented in docs/formats.md. Parsers throw ConfigError
// on unknown keys, wrong types and invalid values.

nlohmann::json read_json_file(const std::filesystem::path& path);

DetectorConfig detector_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DetectorConfig& cfg);

RefineOptions refine_options_from_json(const nlohmann::json& j);

ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioSpec& spec);

ExperimentPlan plan_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SearchOutcome& outcome, bool with_trace);
nlohmann::json to_json(const OcScanResult& result, bool with_trace);
nlohmann::json to_json(const OcScanRResult& result, bool with_trace);

/// Nonzero coordinates of delta-hat as "index,value" lines (0-based index).
std::string delta_csv(const Vector& delta_hat);

}  // namespace cpscan
