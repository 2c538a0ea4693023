#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "equiterm/assembly.hpp"
#include "equiterm/qp.hpp"

namespace equiterm {

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlayerOptions {
  double kkt_tol = 1e-9;
  double dual_tol = 1e-8;        // multipliers at or below this on tight rows mark a degenerate selection
  double activity_tol = 1e-9;    // slack below this (relative to 1 + |b_i|) counts as tight
};

struct ResidualReport {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double dual_feasibility = 0.0;  // max(0, -min eta)
  double complementarity = 0.0;

  double max() const;
};

struct PlayerSolution {
  Eigen::VectorXd primal;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;
  std::vector<std::size_t> active_set;  // tight inequality rows at the returned primal
  double objective = 0.0;               // Psi at the returned primal, retail revenue excluded
  double kkt_residual = 0.0;
  int iterations = 0;
  QpStart warm_state;                   // first-stage point and working set, reused for warm starts
};

struct ResponseJacobian {
  Eigen::MatrixXd matrix;       // dV / dE[Pi]
  std::uint64_t selection_id = 0;
  bool on_boundary = false;
  bool singular = false;        // reduced system had zero curvature in the volume directions
};

// Psi_k(v) = -pi^T v - 1/2 v^T quadratic v.
double player_objective(const PlayerProblem& problem, const Eigen::VectorXd& prices, const Eigen::VectorXd& v);

ResidualReport kkt_residual(const PlayerProblem& problem, const Eigen::VectorXd& prices,
                            const PlayerSolution& solution);

// Global maximizer; the production block is the minimum-norm point of the optimal face.
// Throws SolveError when the feasible set is empty or the solver fails.
PlayerSolution solve_qp(const PlayerProblem& problem, const Eigen::VectorXd& prices,
                        const PlayerOptions& options = {}, const PlayerSolution* warm = nullptr);

Eigen::VectorXd best_response_volumes(const PlayerProblem& problem, const Eigen::VectorXd& prices);

// Selection Jacobian of the volume response with the strongly active rows held fixed.
ResponseJacobian response_jacobian(const PlayerProblem& problem, const PlayerSolution& at,
                                   const PlayerOptions& options = {});
ResponseJacobian response_jacobian(const PlayerProblem& problem, const Eigen::VectorXd& prices,
                                   const PlayerOptions& options = {});

// Rows whose multiplier exceeds dual_tol.
std::vector<std::size_t> strongly_active(const PlayerSolution& solution, const PlayerOptions& options = {});

// Per-player warm-start slot.
class PlayerSolver {
 public:
  explicit PlayerSolver(const PlayerProblem& problem, PlayerOptions options = {})
      : problem_(&problem), options_(options) {}

  const PlayerSolution& solve(const Eigen::VectorXd& prices);
  const PlayerSolution& last() const { return *last_; }
  const PlayerProblem& problem() const { return *problem_; }
  void reset() { last_.reset(); }

 private:
  const PlayerProblem* problem_;
  PlayerOptions options_;
  std::optional<PlayerSolution> last_;
};

}  // namespace equiterm
