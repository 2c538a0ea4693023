#include <algorithm>
#include <cmath>
#include <sstream>

#include "equiterm/covariance.hpp"
#include "equiterm/kernels.hpp"

namespace equiterm {

Eigen::MatrixXd CovarianceBlocks::stacked() const {
  const Eigen::Index n = q1.rows();
  const Eigen::Index m = q3.rows();
  Eigen::MatrixXd full(n + m, n + m);
  full.topLeftCorner(n, n) = q1;
  full.topRightCorner(n, m) = q2;
  full.bottomLeftCorner(m, n) = q2.transpose();
  full.bottomRightCorner(m, m) = q3;
  return full;
}

CovarianceBlocks CovarianceBlocks::split(const Eigen::MatrixXd& full, std::size_t contracts) {
  const Eigen::Index n = static_cast<Eigen::Index>(contracts);
  const Eigen::Index m = full.rows() - n;
  return CovarianceBlocks{full.topLeftCorner(n, n), full.topRightCorner(n, m), full.bottomRightCorner(m, m)};
}

PdReport enforce_positive_definite(Eigen::MatrixXd& m) {
  PdReport r;
  if (m.rows() != m.cols() || m.rows() == 0) {
    r.message = "covariance must be a non-empty square matrix";
    return r;
  }
  if (!m.allFinite()) {
    r.message = "covariance has non-finite entries";
    return r;
  }
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.max_eigenvalue = es.eigenvalues().maxCoeff();
  std::ostringstream msg;
  if (r.max_eigenvalue <= 0.0 || r.min_eigenvalue <= kRelativeRankFloor * r.max_eigenvalue) {
    if (r.min_eigenvalue >= -kRidgeLimit) {
      msg << "covariance rejected: covariance is singular (lambda_min=" << r.min_eigenvalue
          << ", lambda_max=" << r.max_eigenvalue << "); some price is a linear combination of the others";
      r.message = msg.str();
      return r;
    }
  }
  r.ridge = std::max(0.0, kRidgeTarget - r.min_eigenvalue);
  if (r.ridge > kRidgeLimit) {
    msg << "covariance rejected: covariance not positive definite (lambda_min=" << r.min_eigenvalue
        << ", required ridge " << r.ridge << " exceeds " << kRidgeLimit << ")";
    r.message = msg.str();
    r.ridge = 0.0;
    return r;
  }
  if (r.ridge > 0.0) m.diagonal().array() += r.ridge;
  r.ok = true;
  return r;
}

Eigen::VectorXd state_discounts(const TradingGrid& grid, std::size_t fuel_count) {
  const std::size_t n = grid.contract_count();
  Eigen::VectorXd d(n * (fuel_count + 2));
  for (std::size_t node = 0; node < n; ++node) {
    const double f = grid.node_discount(node);
    d[node] = f;
    for (std::size_t l = 0; l < fuel_count; ++l) d[n + node * fuel_count + l] = f;
    d[n * (fuel_count + 1) + node] = f;
  }
  return d;
}

namespace {

Eigen::VectorXd path_state(const PathEnsemble<double>& e, std::size_t w, const Eigen::VectorXd* discounts) {
  const std::vector<double> s = e.state(w);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  if (discounts != nullptr) v.array() *= discounts->array();
  return v;
}

}  // namespace

Eigen::VectorXd weighted_mean(const PathEnsemble<double>& e, bool discounted) {
  const Eigen::VectorXd d = state_discounts(e.grid(), e.fuel_count());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d.size());
  for (std::size_t w = 0; w < e.path_count(); ++w) mean += e.path(w).weight * path_state(e, w, discounted ? &d : nullptr);
  return mean;
}

Eigen::MatrixXd weighted_covariance(const PathEnsemble<double>& e, bool discounted) {
  const Eigen::VectorXd d = state_discounts(e.grid(), e.fuel_count());
  const Eigen::VectorXd mean = weighted_mean(e, discounted);
  const std::size_t dim = static_cast<std::size_t>(mean.size());
  // Row-major accumulation buffer for the rank-one kernel.
  std::vector<double> acc(dim * dim, 0.0);
  for (std::size_t w = 0; w < e.path_count(); ++w) {
    const Eigen::VectorXd x = path_state(e, w, discounted ? &d : nullptr) - mean;
    kernels::syr(e.path(w).weight, x.data(), acc.data(), dim);
  }
  Eigen::MatrixXd cov(dim, dim);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) cov(a, b) = acc[a * dim + b];
  return 0.5 * (cov + cov.transpose());
}

CovarianceBlocks estimate_covariance(const PathEnsemble<double>& e) {
  if (e.path_count() < 2) throw CovarianceError("covariance estimation needs at least two paths");
  for (const PricePath<double>& p : e.paths())
    if (!(p.weight > 0.0)) throw CovarianceError("covariance estimation needs strictly positive path weights");
  Eigen::MatrixXd cov = weighted_covariance(e, true);
  const PdReport r = enforce_positive_definite(cov);
  if (!r.ok) throw CovarianceError(r.message);
  return CovarianceBlocks::split(cov, e.grid().contract_count());
}

ResolvedCovariance resolve_covariance(const Scenario& s) {
  ResolvedCovariance out;
  const std::size_t n = s.grid.contract_count();
  const std::size_t dim = n * (s.fuels.size() + 2);
  if (s.exogenous.ensemble.has_value()) {
    const PathEnsemble<double>& e = *s.exogenous.ensemble;
    if (e.path_count() < 2) {
      out.report.message = "covariance estimation needs at least two paths";
      return out;
    }
    for (const PricePath<double>& p : e.paths())
      if (!(p.weight > 0.0)) {
        out.report.message = "covariance estimation needs strictly positive path weights";
        return out;
      }
    out.matrix = weighted_covariance(e, true);
  } else if (s.exogenous.covariance.has_value()) {
    const CovarianceBlocks& b = *s.exogenous.covariance;
    const Eigen::Index m = static_cast<Eigen::Index>(dim - n);
    if (b.q1.rows() != static_cast<Eigen::Index>(n) || b.q1.cols() != static_cast<Eigen::Index>(n) ||
        b.q2.rows() != static_cast<Eigen::Index>(n) || b.q2.cols() != m || b.q3.rows() != m || b.q3.cols() != m) {
      out.report.message = "covariance block dimensions do not match the grid";
      return out;
    }
    const Eigen::VectorXd d = state_discounts(s.grid, s.fuels.size());
    out.matrix = d.asDiagonal() * b.stacked() * d.asDiagonal();
  } else {
    out.report.message = "scenario carries neither covariance blocks nor an ensemble";
    return out;
  }
  out.report = enforce_positive_definite(out.matrix);
  return out;
}

}  // namespace equiterm
