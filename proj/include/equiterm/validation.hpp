#pragma once

#include <optional>
#include <string>
#include <vector>

#include "equiterm/covariance.hpp"
#include "equiterm/model.hpp"

namespace equiterm {

enum class Severity { Error, Warning };

struct ValidationCheck {
  std::string name;
  Severity severity = Severity::Error;
  bool passed = false;
  std::string message;
  std::optional<double> value;
};

struct BoundHeuristics {
  double v_trade = 0.0;  // suggested minimum for each bound
  double f_trade = 0.0;
  double pi_max = 0.0;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  std::vector<double> player_margins;  // phase-I margin per player (producers, then consumers)
  std::optional<double> joint_margin;
  PdReport covariance;
  std::optional<BoundHeuristics> suggested_bounds;

  bool ok() const;  // no failed error-level check
  std::vector<const ValidationCheck*> failures() const;
};

struct ValidationOptions {
  double feas_margin = 1e-6;
  double margin_cap = 1.0;  // phase-I margins are reported up to this value
};

ValidationReport validate_scenario(const Scenario& scenario, const ValidationOptions& options = {});

}  // namespace equiterm
