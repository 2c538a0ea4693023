#pragma once

#include <Eigen/Dense>

namespace equiterm {

// minimize c^T x  s.t.  a_eq x = b_eq,  a_in x <= b_in,  lower <= x <= upper.
// Bounds may be +-infinity; empty matrices are allowed.
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_in;
  Eigen::VectorXd b_in;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  // Free variables, no constraints.
  static LpProblem free_variables(Eigen::Index n);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

struct LpOptions {
  double pivot_tol = 1e-9;
  double feasibility_tol = 1e-9;
  int max_iterations = 50000;
};

// Dense two-phase simplex.
LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

const char* to_string(LpStatus s);

}  // namespace equiterm
