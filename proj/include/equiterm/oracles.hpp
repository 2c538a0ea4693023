#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiterm/equilibrium.hpp"

namespace equiterm {

struct TwoStageParams {
  double expected_t2_price = 0.0;
  std::vector<double> lambdas;           // every player's risk aversion
  std::vector<double> cost_covariances;  // per producer: Cov(Pi(t2) - Pi(t1), procurement cost)
  double demand_covariance = 0.0;
  double retail = 0.0;                   // sum_c s_c p_c
};

// 1 / sum_k (1 / lambda_k)
double harmonic_risk_aversion(const std::vector<double>& lambdas);

// Pi(t1) = E[Pi(t2)] + Lambda * (sum_p cost_cov_p - retail * demand_cov), Lambda harmonic.
double two_stage_price(const TwoStageParams& params);

struct TwoStageDelivery {
  std::size_t delivery = 0;
  double solver_first = 0.0;       // equilibrium price at the first trading time
  double solver_second = 0.0;      // equilibrium price at the delivery time
  double closed_form_first = 0.0;
  double relative_error = 0.0;
  bool interior = false;           // no forward volume on its trading bound
  bool kink = false;               // a plant sits on a bound with a zero multiplier
  TwoStageParams params;
};

struct TwoStageCheck {
  EquilibriumResult equilibrium;
  std::vector<TwoStageDelivery> deliveries;  // deliveries with exactly two trading times
  double max_relative_error = 0.0;
};

// Solves the general model, then evaluates the closed form for every delivery
// with two trading times using procurement plans from a producer QP whose
// per-delivery forward total is held at its equilibrium value.
TwoStageCheck two_stage_cross_check(const Market& market, const EquilibriumOptions& options = {});

enum class Multiplicity { None, Price, Volume };
const char* to_string(Multiplicity m);

struct MeanMaxDelivery {
  double price = 0.0;       // discounted, flat over the delivery's trading times
  double price_low = 0.0;   // clearing price interval
  double price_high = 0.0;
  double supply_min = 0.0;  // production just below / above `price`
  double supply_max = 0.0;
  double demand = 0.0;
  Multiplicity multiplicity = Multiplicity::None;
  bool clears = false;
};

struct MeanMaxResult {
  Eigen::VectorXd prices;
  std::vector<MeanMaxDelivery> deliveries;
  double max_spread = 0.0;  // largest intra-delivery price spread
  bool converged = false;
  int sweeps = 0;
  std::string message;
};

struct MeanMaxOptions {
  double price_tol = 1e-10;      // bisection width relative to 1 + |price|
  double side_offset = 1e-7;     // relative price offset for the one-sided supply limits
  double interval_tol = 1e-6;    // clearing intervals wider than this (relative) are price multiplicity
  double volume_tol = 1e-7;
  int max_sweeps = 50;
};

// Equilibrium of the risk-neutral variant (quadratic terms dropped), by
// bisection on each delivery's flat price against the LP supply range.
MeanMaxResult mean_max_equilibrium(const Scenario& scenario, const MeanMaxOptions& options = {});

struct GridSpec {
  double step = 1e-4;
  std::size_t coarse_points = 20;      // lattice points per axis on the first level, at least
  std::size_t candidates = 3;          // points refined on each level
  std::size_t exhaustive_limit = 200000;
};

struct BruteForceResult {
  Eigen::VectorXd prices;
  Eigen::VectorXd excess;
  double residual = 0.0;
  std::size_t evaluations = 0;
  bool bracketed = false;  // the point is a corner of a lattice cell whose corner values surround 0
  std::vector<PlayerSolution> solutions;
};

// Lattice point of {-Pi_max + k * step} minimizing the max-norm excess volume,
// restricted to corners of cells that bracket a root when such cells exist.
// Throws std::invalid_argument when N > 3.
BruteForceResult brute_force_equilibrium(const Market& market, const GridSpec& spec = {});

}  // namespace equiterm
