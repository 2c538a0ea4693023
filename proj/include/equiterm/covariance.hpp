#pragma once

#include <string>

#include <Eigen/Dense>

#include "equiterm/model.hpp"

namespace equiterm {

class CovarianceError : public ModelError {
 public:
  using ModelError::ModelError;
};

struct PdReport {
  bool ok = false;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double ridge = 0.0;
  std::string message;
};

inline constexpr double kRidgeTarget = 1e-10;
inline constexpr double kRidgeLimit = 1e-6;
inline constexpr double kRelativeRankFloor = 1e-12;

// Symmetrizes `m` in place and applies the ridge rule. Numerically singular
// matrices (exact linear dependence) are rejected before any ridge is tried.
PdReport enforce_positive_definite(Eigen::MatrixXd& m);

// Population covariance of the (Pi, G, G_em) state under the path weights,
// optionally with each node discounted by exp(-r T_j). No PD enforcement.
Eigen::MatrixXd weighted_covariance(const PathEnsemble<double>& ensemble, bool discounted = true);

// Discounted, symmetrized, PD-enforced estimate. Throws CovarianceError.
CovarianceBlocks estimate_covariance(const PathEnsemble<double>& ensemble);

// Weighted mean of the discounted state.
Eigen::VectorXd weighted_mean(const PathEnsemble<double>& ensemble, bool discounted = true);

// Diagonal of exp(-r T_j) factors matching the (Pi, G, G_em) layout.
Eigen::VectorXd state_discounts(const TradingGrid& grid, std::size_t fuel_count);

struct ResolvedCovariance {
  Eigen::MatrixXd matrix;  // discounted stacked covariance
  PdReport report;
};

// Discounted model covariance from whichever source the scenario carries.
ResolvedCovariance resolve_covariance(const Scenario& scenario);

}  // namespace equiterm
