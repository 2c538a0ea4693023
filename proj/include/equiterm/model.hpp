#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiterm/grid.hpp"
#include "equiterm/price_process.hpp"

namespace equiterm {

struct PowerPlant {
  std::string name;
  std::string fuel;
  double capacity = 0.0;   // MWh per delivery period
  double ramp_up = 0.0;    // >= 0
  double ramp_down = 0.0;  // <= 0
  double efficiency = 0.0; // fuel units per MWh
};

struct Producer {
  std::string name;
  double risk_aversion = 0.0;
  std::vector<PowerPlant> plants;
};

struct Consumer {
  std::string name;
  double risk_aversion = 0.0;
  double demand_share = 0.0;
  double retail_price = 0.0;
};

struct Fuel {
  std::string name;
  double emission_intensity = 0.0;  // emission units per MWh produced from this fuel
};

// Covariance of (Pi, G, G_em): q1 is N x N, q2 is N x N(L+1), q3 is N(L+1) x N(L+1).
struct CovarianceBlocks {
  Eigen::MatrixXd q1, q2, q3;

  Eigen::MatrixXd stacked() const;
  static CovarianceBlocks split(const Eigen::MatrixXd& full, std::size_t contracts);
};

struct ExogenousModel {
  std::vector<double> demand;                      // per delivery
  std::vector<std::vector<double>> fuel_forwards;  // [fuel][node], undiscounted
  std::vector<double> emission_forwards;           // [node], undiscounted
  std::optional<CovarianceBlocks> covariance;      // undiscounted quotes
  std::optional<PathEnsemble<double>> ensemble;    // undiscounted paths
};

struct Bounds {
  double v_trade = 0.0;
  double f_trade = 0.0;
  double pi_max = 0.0;
};

struct Scenario {
  TradingGrid grid;
  std::vector<Producer> producers;
  std::vector<Consumer> consumers;
  std::vector<Fuel> fuels;
  ExogenousModel exogenous;
  Bounds bounds;

  std::size_t fuel_index(const std::string& name) const;
  double total_capacity() const;
};

// Cost of one MWh: efficiency * fuel price + intensity * emission price.
double marginal_cost(const PowerPlant& plant, const Fuel& fuel, double fuel_price, double emission_price);

}  // namespace equiterm
