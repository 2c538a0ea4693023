#pragma once

#include <vector>

#include <Eigen/Dense>

namespace equiterm {

// minimize 1/2 x^T H x + c^T x  s.t.  A x = a,  B x <= b,  with H symmetric PSD.
struct QpData {
  const Eigen::MatrixXd& h;
  const Eigen::VectorXd& c;
  const Eigen::MatrixXd& a;
  const Eigen::VectorXd& av;
  const Eigen::MatrixXd& b;
  const Eigen::VectorXd& bv;
};

struct QpOptions {
  double feasibility_tol = 1e-9;  // tightness and start-point acceptance, relative to row scale
  double curvature_tol = 1e-11;   // reduced-Hessian eigenvalues below this * max are treated as zero
  double step_tol = 1e-14;
  double dual_tol = 1e-12;        // relative to 1 + |gradient|
  int max_iterations = 0;         // 0: derived from the problem size
};

enum class QpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct QpStart {
  Eigen::VectorXd x;
  std::vector<int> working_set;
};

struct QpResult {
  QpStatus status = QpStatus::IterationLimit;
  Eigen::VectorXd x;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;      // zero outside the working set
  std::vector<int> working_set;    // independent tight rows carrying the multipliers
  int iterations = 0;
};

// Primal active-set method with a null-space step. Zero-curvature descent
// directions are followed as rays to the first blocking constraint. Starts
// from `start` when it is feasible, otherwise from a phase-I LP vertex.
QpResult solve_convex_qp(const QpData& qp, const QpStart* start = nullptr, const QpOptions& options = {});

// Orthonormal basis of the null space of `m` (columns).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m);

const char* to_string(QpStatus s);

}  // namespace equiterm
