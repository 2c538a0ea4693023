#pragma once

#include <string>

#include <json.hpp>

#include "equiterm/equilibrium.hpp"
#include "equiterm/oracles.hpp"
#include "equiterm/validation.hpp"

namespace equiterm {

enum class Format { Json, Text };

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const PdReport& r);
nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const EquilibriumResult& r, bool with_trace = false);
nlohmann::json to_json(const SaturationReport& r);
nlohmann::json to_json(const DiagnosticsReport& r);
nlohmann::json to_json(const TwoStageCheck& r);
nlohmann::json to_json(const MeanMaxResult& r);
nlohmann::json to_json(const BruteForceResult& r);
nlohmann::json to_json(const EquilibriumOptions& o);

// Text form lists one "dotted.path: value" line per leaf; floats carry 17 significant digits.
std::string render(const nlohmann::json& report, Format format);

}  // namespace equiterm
