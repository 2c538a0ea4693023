#include <algorithm>
#include <cmath>
#include <limits>

#include "equiterm/kernels.hpp"
#include "equiterm/lp.hpp"
#include "equiterm/qp.hpp"

namespace equiterm {

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::Unbounded: return "unbounded";
    case QpStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.transpose());
  qr.setThreshold(1e-12);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - r);
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

bool feasible(const QpData& qp, const RowMajor& b, const Eigen::VectorXd& x, const Eigen::VectorXd& row_scale,
              double tol) {
  if (x.size() != qp.c.size() || !x.allFinite()) return false;
  if (qp.a.rows() > 0) {
    const Eigen::VectorXd r = qp.a * x - qp.av;
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (std::abs(r[i]) > tol * (1.0 + std::abs(qp.av[i]) + qp.a.row(i).cwiseAbs().dot(x.cwiseAbs()))) return false;
  }
  Eigen::VectorXd bx(b.rows());
  if (b.rows() > 0) kernels::gemv(b.data(), static_cast<std::size_t>(b.rows()), static_cast<std::size_t>(b.cols()), x.data(), bx.data());
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    if (bx[i] - qp.bv[i] > tol * row_scale[i]) return false;
  return true;
}

bool phase_one(const QpData& qp, Eigen::VectorXd& x) {
  LpProblem lp = LpProblem::free_variables(qp.c.size());
  lp.a_eq = qp.a;
  lp.b_eq = qp.av;
  lp.a_in = qp.b;
  lp.b_in = qp.bv;
  const LpResult r = solve_lp(lp);
  if (r.status != LpStatus::Optimal) return false;
  x = r.x;
  return true;
}

}  // namespace

QpResult solve_convex_qp(const QpData& qp, const QpStart* start, const QpOptions& opt) {
  const Eigen::Index n = qp.c.size();
  const Eigen::Index me = qp.a.rows();
  const Eigen::Index mi = qp.b.rows();
  QpResult res;
  const RowMajor b = qp.b;
  Eigen::VectorXd row_scale(mi);
  for (Eigen::Index i = 0; i < mi; ++i) row_scale[i] = 1.0 + std::abs(qp.bv[i]);

  Eigen::VectorXd x;
  std::vector<int> work;
  if (start != nullptr && feasible(qp, b, start->x, row_scale, opt.feasibility_tol)) {
    x = start->x;
    work = start->working_set;
  } else if (!phase_one(qp, x)) {
    res.status = QpStatus::Infeasible;
    return res;
  }

  Eigen::VectorXd bx(mi), bp(mi);
  auto eval_b = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    if (mi > 0) kernels::gemv(b.data(), static_cast<std::size_t>(mi), static_cast<std::size_t>(n), v.data(), out.data());
  };

  // Keep only tight, linearly independent warm-start rows.
  eval_b(x, bx);
  {
    std::vector<int> kept;
    Eigen::MatrixXd ct(n, me);
    if (me > 0) ct = qp.a.transpose();
    Eigen::Index rank = me > 0 ? Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(ct).rank() : 0;
    for (int i : work) {
      if (i < 0 || i >= mi || std::find(kept.begin(), kept.end(), i) != kept.end()) continue;
      if (std::abs(bx[i] - qp.bv[i]) > opt.feasibility_tol * row_scale[i]) continue;
      Eigen::MatrixXd trial(n, ct.cols() + 1);
      trial << ct, b.row(i).transpose();
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
      qr.setThreshold(1e-12);
      if (qr.rank() <= rank) continue;
      rank = qr.rank();
      ct = trial;
      kept.push_back(i);
    }
    work = kept;
  }

  const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(50 * (n + mi) + 100);
  std::vector<char> in_work(static_cast<std::size_t>(mi), 0);
  for (int i : work) in_work[static_cast<std::size_t>(i)] = 1;

  Eigen::VectorXd lambda;
  bool stationary = false;  // set after an unblocked Newton step
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    const Eigen::VectorXd g = qp.h * x + qp.c;
    const Eigen::Index k = me + static_cast<Eigen::Index>(work.size());
    Eigen::MatrixXd ct(n, k);
    if (me > 0) ct.leftCols(me) = qp.a.transpose();
    for (std::size_t w = 0; w < work.size(); ++w) ct.col(me + static_cast<Eigen::Index>(w)) = b.row(work[w]).transpose();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    Eigen::MatrixXd z;
    if (k > 0) {
      qr.compute(ct);
      qr.setThreshold(1e-12);
      const Eigen::MatrixXd q = qr.householderQ();
      z = q.rightCols(n - qr.rank());
    } else {
      z = Eigen::MatrixXd::Identity(n, n);
    }

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    bool ray = false;
    if (!stationary && z.cols() > 0) {
      const Eigen::MatrixXd hz = z.transpose() * qp.h * z;
      const Eigen::VectorXd gz = z.transpose() * g;
      const double hmax = std::max(1.0, hz.diagonal().cwiseAbs().maxCoeff());
      Eigen::LLT<Eigen::MatrixXd> llt(hz);
      bool pd = llt.info() == Eigen::Success;
      if (pd) {
        const Eigen::VectorXd d = llt.matrixLLT().diagonal();
        pd = d.minCoeff() * d.minCoeff() > opt.curvature_tol * hmax;
      }
      if (pd) {
        p = -(z * llt.solve(gz));
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hz);
        const Eigen::VectorXd& ev = es.eigenvalues();
        const Eigen::MatrixXd& u = es.eigenvectors();
        const Eigen::VectorXd w = u.transpose() * gz;
        const double tau = opt.curvature_tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
        Eigen::VectorXd flat = Eigen::VectorXd::Zero(w.size());
        Eigen::VectorXd newton = Eigen::VectorXd::Zero(w.size());
        for (Eigen::Index i = 0; i < w.size(); ++i) {
          if (ev[i] <= tau) flat[i] = w[i];
          else newton[i] = -w[i] / ev[i];
        }
        if (flat.norm() > 1e-11 * (1.0 + inf_norm(g))) {
          p = -(z * (u * flat));
          ray = true;
        } else {
          p = z * (u * newton);
        }
      }
    }

    if (stationary || (!ray && inf_norm(p) <= opt.step_tol * (1.0 + inf_norm(x)))) {
      // Stationary on the working set: check the multipliers.
      lambda = k > 0 ? Eigen::VectorXd(qr.solve(-g)) : Eigen::VectorXd();
      int drop = -1;
      double most = -opt.dual_tol * (1.0 + inf_norm(g));
      for (std::size_t w = 0; w < work.size(); ++w) {
        const double eta = lambda[me + static_cast<Eigen::Index>(w)];
        if (eta < most) {
          most = eta;
          drop = static_cast<int>(w);
        }
      }
      if (drop < 0) {
        res.status = QpStatus::Optimal;
        break;
      }
      in_work[static_cast<std::size_t>(work[static_cast<std::size_t>(drop)])] = 0;
      work.erase(work.begin() + drop);
      stationary = false;
      continue;
    }

    eval_b(x, bx);
    eval_b(p, bp);
    const double pnorm = inf_norm(p);
    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    int block = -1;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (in_work[static_cast<std::size_t>(i)]) continue;
      if (bp[i] <= 1e-13 * pnorm * (1.0 + b.row(i).cwiseAbs().sum())) continue;
      const double a_i = std::max(0.0, (qp.bv[i] - bx[i]) / bp[i]);
      if (a_i < alpha) {
        alpha = a_i;
        block = static_cast<int>(i);
      }
    }
    if (block < 0 && ray) {
      res.status = QpStatus::Unbounded;
      break;
    }
    kernels::axpy(alpha, p.data(), x.data(), static_cast<std::size_t>(n));
    if (block >= 0) {
      work.push_back(block);
      in_work[static_cast<std::size_t>(block)] = 1;
    }
    stationary = !ray && block < 0;
  }

  res.x = x;
  res.working_set = work;
  res.eq_duals = Eigen::VectorXd::Zero(me);
  res.ineq_duals = Eigen::VectorXd::Zero(mi);
  if (res.status == QpStatus::Optimal && lambda.size() == me + static_cast<Eigen::Index>(work.size())) {
    res.eq_duals = lambda.head(me);
    for (std::size_t w = 0; w < work.size(); ++w)
      res.ineq_duals[work[w]] = std::max(0.0, lambda[me + static_cast<Eigen::Index>(w)]);
  }
  return res;
}

}  // namespace equiterm
