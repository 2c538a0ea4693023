#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "equiterm/model.hpp"

namespace equiterm {

inline constexpr const char* kScenarioSchema = "equiterm/1";

// Unreadable or missing input file.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally invalid scenario document.
class ScenarioError : public ModelError {
 public:
  using ModelError::ModelError;
};

std::string read_file(const std::string& path);
std::string sha256_hex(std::string_view bytes);

TradingGrid parse_grid(const nlohmann::json& j);
PathEnsemble<double> parse_ensemble(const nlohmann::json& j, const TradingGrid& grid, std::size_t fuel_count);
Scenario parse_scenario(const nlohmann::json& j);
Scenario parse_scenario_text(std::string_view text);

nlohmann::json to_json(const TradingGrid& grid);
nlohmann::json to_json(const PathEnsemble<double>& ensemble);
nlohmann::json to_json(const Scenario& scenario);

struct LoadedScenario {
  Scenario scenario;
  std::string sha256;
};

LoadedScenario load_scenario(const std::string& path);

// Ensemble-only document: {"schema", "grid", "fuels" | "fuel_count", "ensemble"},
// or a full scenario whose exogenous block carries an ensemble.
struct LoadedEnsemble {
  PathEnsemble<double> ensemble;
  std::string sha256;
};

LoadedEnsemble load_ensemble(const std::string& path);

}  // namespace equiterm
