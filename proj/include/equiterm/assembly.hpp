#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiterm/index_map.hpp"
#include "equiterm/model.hpp"

namespace equiterm {

enum class RowKind {
  VolumeBalance,
  FuelBalance,
  EmissionBalance,
  DemandBalance,
  RampUp,
  RampDown,
  CapacityUpper,
  CapacityLower,
  VolumeUpper,
  VolumeLower,
  FuelUpper,
  FuelLower,
  EmissionUpper,
  EmissionLower,
};

// What a constraint row encodes. `slot` is the plant position within one
// delivery's production block; ramp rows refer to deliveries j and j+1.
struct RowTag {
  RowKind kind = RowKind::VolumeBalance;
  std::size_t delivery = 0;
  std::size_t node = 0;
  std::size_t fuel = 0;
  std::size_t slot = 0;
};

enum class PlayerKind { Producer, Consumer };

// max -pi^T v - 1/2 v^T quadratic v  s.t.  eq_matrix v = eq_rhs, ineq_matrix v <= ineq_rhs,
// where pi = linear with its electricity block replaced by the query prices.
struct PlayerProblem {
  PlayerKind kind = PlayerKind::Consumer;
  std::size_t player_index = 0;  // position within its kind
  std::string name;
  double risk_aversion = 0.0;

  Eigen::MatrixXd quadratic;
  Eigen::VectorXd linear;  // discounted expected fuel and emission prices; zero on V and W
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  std::vector<RowTag> eq_tags;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  std::vector<RowTag> ineq_tags;
  IndexMap index_map;
  // Producer only: index into Producer::plants for each production slot.
  std::vector<std::size_t> plant_of_slot;

  std::size_t dimension() const { return static_cast<std::size_t>(linear.size()); }
  std::size_t contracts() const { return index_map.contracts(); }
  Eigen::VectorXd linear_at(const Eigen::VectorXd& prices) const;
};

// Plants of a producer in canonical order: by fuel (fuel-table order), then by
// name and remaining attributes, so insertion order does not matter.
std::vector<std::size_t> canonical_plant_order(const Producer& producer, const Scenario& scenario);

IndexMap canonical_index(const TradingGrid& grid, const Producer& producer, const Scenario& scenario);
IndexMap canonical_index(const TradingGrid& grid);

PlayerProblem assemble_producer(const Producer& producer, const Scenario& scenario,
                                const Eigen::MatrixXd& covariance);
PlayerProblem assemble_consumer(const Consumer& consumer, const Scenario& scenario,
                                const Eigen::MatrixXd& covariance);
// Resolve the covariance first; throw ModelError when it is unusable.
PlayerProblem assemble_producer(const Producer& producer, const Scenario& scenario);
PlayerProblem assemble_consumer(const Consumer& consumer, const Scenario& scenario);

// The per-delivery summation matrix (|J| x N).
Eigen::MatrixXd delivery_sum_matrix(const TradingGrid& grid);

// A scenario with every player assembled against one resolved covariance.
struct Market {
  Scenario scenario;
  Eigen::MatrixXd covariance;       // discounted stacked covariance
  Eigen::VectorXd fuel_prices;      // discounted expected G, node-major
  Eigen::VectorXd emission_prices;  // discounted expected G_em
  std::vector<PlayerProblem> players;  // producers, then consumers
  Eigen::MatrixXd a1;

  std::size_t contracts() const { return scenario.grid.contract_count(); }
  std::size_t producer_count() const { return scenario.producers.size(); }

  static Market assemble(const Scenario& scenario);
};

}  // namespace equiterm
