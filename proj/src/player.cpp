#include <algorithm>
#include <cmath>

#include "equiterm/kernels.hpp"
#include "equiterm/player.hpp"

namespace equiterm {

double ResidualReport::max() const {
  return std::max({stationarity, primal_feasibility, dual_feasibility, complementarity});
}

double player_objective(const PlayerProblem& p, const Eigen::VectorXd& prices, const Eigen::VectorXd& v) {
  const Eigen::VectorXd pi = p.linear_at(prices);
  return -pi.dot(v) - 0.5 * v.dot(p.quadratic * v);
}

ResidualReport kkt_residual(const PlayerProblem& p, const Eigen::VectorXd& prices, const PlayerSolution& s) {
  ResidualReport r;
  const Eigen::VectorXd& v = s.primal;
  Eigen::VectorXd station = p.quadratic * v + p.linear_at(prices);
  if (p.eq_matrix.rows() > 0 && s.eq_duals.size() == p.eq_matrix.rows()) station += p.eq_matrix.transpose() * s.eq_duals;
  if (p.ineq_matrix.rows() > 0 && s.ineq_duals.size() == p.ineq_matrix.rows())
    station += p.ineq_matrix.transpose() * s.ineq_duals;
  r.stationarity = station.lpNorm<Eigen::Infinity>();
  if (p.eq_matrix.rows() > 0) r.primal_feasibility = (p.eq_matrix * v - p.eq_rhs).lpNorm<Eigen::Infinity>();
  if (p.ineq_matrix.rows() > 0) {
    const Eigen::VectorXd slack = p.ineq_matrix * v - p.ineq_rhs;
    r.primal_feasibility = std::max(r.primal_feasibility, std::max(0.0, slack.maxCoeff()));
    if (s.ineq_duals.size() == slack.size()) {
      r.dual_feasibility = std::max(0.0, -s.ineq_duals.minCoeff());
      r.complementarity = s.ineq_duals.cwiseProduct(slack).lpNorm<Eigen::Infinity>();
    }
  }
  return r;
}

namespace {

QpStart default_start(const PlayerProblem& p) {
  QpStart st;
  st.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.dimension()));
  if (p.kind == PlayerKind::Consumer) {
    // Equal split of each delivery's obligation.
    for (Eigen::Index r = 0; r < p.eq_matrix.rows(); ++r) {
      const double count = p.eq_matrix.row(r).sum();
      for (Eigen::Index k = 0; k < p.eq_matrix.cols(); ++k)
        if (p.eq_matrix(r, k) != 0.0) st.x[k] = p.eq_rhs[r] / count;
    }
  }
  return st;
}

// Minimum-norm production plan with (V, F, O) held at the first-stage optimum.
bool minimum_norm_production(const PlayerProblem& p, Eigen::VectorXd& x) {
  const Eigen::Index pb = static_cast<Eigen::Index>(p.index_map.production_begin());
  const Eigen::Index nw = x.size() - pb;
  if (nw <= 0) return true;
  const Eigen::VectorXd fixed = x.head(pb);
  const Eigen::MatrixXd aw = p.eq_matrix.rightCols(nw);
  const Eigen::VectorXd av = p.eq_rhs - p.eq_matrix.leftCols(pb) * fixed;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < p.ineq_matrix.rows(); ++i)
    if (p.ineq_matrix.row(i).tail(nw).cwiseAbs().maxCoeff() > 0.0) rows.push_back(i);
  Eigen::MatrixXd bw(static_cast<Eigen::Index>(rows.size()), nw);
  Eigen::VectorXd bv(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Eigen::Index i = rows[k];
    bw.row(static_cast<Eigen::Index>(k)) = p.ineq_matrix.row(i).tail(nw);
    bv[static_cast<Eigen::Index>(k)] = p.ineq_rhs[i] - p.ineq_matrix.row(i).head(pb).dot(fixed);
  }
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(nw, nw);
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(nw);
  QpStart start{x.tail(nw), {}};
  const QpResult r = solve_convex_qp(QpData{h, c, aw, av, bw, bv}, &start);
  if (r.status != QpStatus::Optimal) return false;
  x.tail(nw) = r.x;
  return true;
}

std::vector<std::size_t> tight_rows(const PlayerProblem& p, const Eigen::VectorXd& x, double tol) {
  std::vector<std::size_t> out;
  if (p.ineq_matrix.rows() == 0) return out;
  const Eigen::VectorXd slack = p.ineq_rhs - p.ineq_matrix * x;
  for (Eigen::Index i = 0; i < slack.size(); ++i)
    if (slack[i] <= tol * (1.0 + std::abs(p.ineq_rhs[i]))) out.push_back(static_cast<std::size_t>(i));
  return out;
}

}  // namespace

PlayerSolution solve_qp(const PlayerProblem& p, const Eigen::VectorXd& prices, const PlayerOptions& opt,
                        const PlayerSolution* warm) {
  if (prices.size() != static_cast<Eigen::Index>(p.contracts()) || !prices.allFinite())
    throw SolveError("player '" + p.name + "': price vector must be finite with one entry per contract");
  const Eigen::VectorXd c = p.linear_at(prices);
  const QpData data{p.quadratic, c, p.eq_matrix, p.eq_rhs, p.ineq_matrix, p.ineq_rhs};

  QpResult r;
  if (warm != nullptr && warm->warm_state.x.size() == c.size()) r = solve_convex_qp(data, &warm->warm_state);
  if (r.status != QpStatus::Optimal) {
    const QpStart start = default_start(p);
    r = solve_convex_qp(data, &start);
  }
  if (r.status == QpStatus::Infeasible)
    throw SolveError("player '" + p.name + "': constraints are infeasible (no feasible plan)");
  if (r.status != QpStatus::Optimal)
    throw SolveError("player '" + p.name + "': QP solver failed (" + std::string(to_string(r.status)) + ")");

  PlayerSolution s;
  s.warm_state = QpStart{r.x, r.working_set};
  s.primal = r.x;
  s.eq_duals = r.eq_duals;
  s.ineq_duals = r.ineq_duals;
  s.iterations = r.iterations;
  if (p.kind == PlayerKind::Producer) {
    Eigen::VectorXd x = r.x;
    if (minimum_norm_production(p, x)) s.primal = x;
  }
  s.active_set = tight_rows(p, s.primal, opt.activity_tol);
  s.objective = player_objective(p, prices, s.primal);
  s.kkt_residual = kkt_residual(p, prices, s).max();
  return s;
}

Eigen::VectorXd best_response_volumes(const PlayerProblem& p, const Eigen::VectorXd& prices) {
  return solve_qp(p, prices).primal.head(static_cast<Eigen::Index>(p.contracts()));
}

std::vector<std::size_t> strongly_active(const PlayerSolution& s, const PlayerOptions& opt) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < s.ineq_duals.size(); ++i)
    if (s.ineq_duals[i] > opt.dual_tol) out.push_back(static_cast<std::size_t>(i));
  return out;
}

ResponseJacobian response_jacobian(const PlayerProblem& p, const PlayerSolution& at, const PlayerOptions& opt) {
  ResponseJacobian out;
  const std::vector<std::size_t> strong = strongly_active(at, opt);
  const Eigen::Index n = static_cast<Eigen::Index>(p.contracts());
  const Eigen::Index dim = static_cast<Eigen::Index>(p.dimension());

  Eigen::MatrixXd c(p.eq_matrix.rows() + static_cast<Eigen::Index>(strong.size()), dim);
  c.topRows(p.eq_matrix.rows()) = p.eq_matrix;
  for (std::size_t k = 0; k < strong.size(); ++k)
    c.row(p.eq_matrix.rows() + static_cast<Eigen::Index>(k)) = p.ineq_matrix.row(static_cast<Eigen::Index>(strong[k]));
  const Eigen::MatrixXd z = null_space(c);

  out.matrix = Eigen::MatrixXd::Zero(n, n);
  if (z.cols() > 0) {
    const Eigen::MatrixXd hz = z.transpose() * p.quadratic * z;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (hz + hz.transpose()));
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double tau = 1e-11 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd zv = z.topRows(n) * es.eigenvectors();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev[i] > tau) {
        out.matrix.noalias() -= (zv.col(i) / ev[i]) * zv.col(i).transpose();
      } else if (zv.col(i).norm() > 1e-9) {
        out.singular = true;
      }
    }
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  }

  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i : strong) {
    h ^= static_cast<std::uint64_t>(i) + 1;
    h *= 1099511628211ULL;
  }
  out.selection_id = h;
  for (std::size_t i : at.active_set)
    if (at.ineq_duals[static_cast<Eigen::Index>(i)] <= opt.dual_tol) out.on_boundary = true;
  return out;
}

ResponseJacobian response_jacobian(const PlayerProblem& p, const Eigen::VectorXd& prices, const PlayerOptions& opt) {
  return response_jacobian(p, solve_qp(p, prices, opt), opt);
}

const PlayerSolution& PlayerSolver::solve(const Eigen::VectorXd& prices) {
  PlayerSolution next = solve_qp(*problem_, prices, options_, last_ ? &*last_ : nullptr);
  last_ = std::move(next);
  return *last_;
}

}  // namespace equiterm
