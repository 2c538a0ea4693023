#include <cmath>
#include <limits>
#include <vector>

#include "equiterm/kernels.hpp"
#include "equiterm/lp.hpp"

namespace equiterm {

LpProblem LpProblem::free_variables(Eigen::Index n) {
  LpProblem p;
  p.c = Eigen::VectorXd::Zero(n);
  p.a_eq.resize(0, n);
  p.b_eq.resize(0);
  p.a_in.resize(0, n);
  p.b_in.resize(0);
  p.lower = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  p.upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  return p;
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

// Original variable x_j = offset_j + sum_k sign_k * y_{col_k}.
struct VarMap {
  double offset = 0.0;
  int plus = -1;
  int minus = -1;
};

class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), w_(cols + 1), t_(static_cast<std::size_t>((rows + 1) * (cols + 1)), 0.0) {}

  double& at(int r, int c) { return t_[static_cast<std::size_t>(r * w_ + c)]; }
  double* row(int r) { return t_.data() + static_cast<std::size_t>(r) * w_; }
  double& rhs(int r) { return at(r, w_ - 1); }
  int rows() const { return m_; }
  int cols() const { return w_ - 1; }

  void pivot(int pr, int pc) {
    double* prow = row(pr);
    const double inv = 1.0 / prow[pc];
    for (int c = 0; c < w_; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      double* rr = row(r);
      const double f = rr[pc];
      if (f == 0.0) continue;
      kernels::axpy(-f, prow, rr, static_cast<std::size_t>(w_));
      rr[pc] = 0.0;
    }
  }

 private:
  int m_;
  int w_;
  std::vector<double> t_;  // last row is the objective row
};

enum class Outcome { Optimal, Unbounded, IterationLimit };

// Minimize the objective row over columns allowed[c]; the objective row holds
// reduced costs and -objective value in the rhs slot.
Outcome run_simplex(Tableau& t, std::vector<int>& basis, const std::vector<char>& allowed, const LpOptions& opt,
                    int& iterations) {
  const int m = t.rows();
  int degenerate_streak = 0;
  while (true) {
    if (iterations >= opt.max_iterations) return Outcome::IterationLimit;
    const bool bland = degenerate_streak > 50;
    int pc = -1;
    double best = -opt.pivot_tol;
    for (int c = 0; c < t.cols(); ++c) {
      if (!allowed[static_cast<std::size_t>(c)]) continue;
      const double d = t.at(m, c);
      if (d < best) {
        pc = c;
        if (bland) break;
        best = d;
      }
    }
    if (pc < 0) return Outcome::Optimal;

    int pr = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      const double a = t.at(r, pc);
      if (a <= opt.pivot_tol) continue;
      const double q = std::max(0.0, t.rhs(r)) / a;
      if (q < ratio - 1e-14 || (q <= ratio + 1e-14 && pr >= 0 && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(pr)])) {
        ratio = q;
        pr = r;
      }
    }
    if (pr < 0) return Outcome::Unbounded;
    degenerate_streak = ratio <= 1e-14 ? degenerate_streak + 1 : 0;
    t.pivot(pr, pc);
    basis[static_cast<std::size_t>(pr)] = pc;
    ++iterations;
  }
}

}  // namespace

LpResult solve_lp(const LpProblem& p, const LpOptions& opt) {
  const Eigen::Index n = p.c.size();
  const double inf = std::numeric_limits<double>::infinity();
  LpResult result;

  // Variable substitution into non-negative columns.
  std::vector<VarMap> vars(static_cast<std::size_t>(n));
  int ncol = 0;
  std::vector<std::pair<int, double>> ub_rows;  // (column, bound) for doubly bounded vars
  for (Eigen::Index j = 0; j < n; ++j) {
    VarMap& v = vars[static_cast<std::size_t>(j)];
    const double lo = p.lower.size() ? p.lower[j] : -inf;
    const double hi = p.upper.size() ? p.upper[j] : inf;
    if (lo > hi) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    if (std::isfinite(lo)) {
      v.offset = lo;
      v.plus = ncol++;
      if (std::isfinite(hi)) ub_rows.emplace_back(v.plus, hi - lo);
    } else if (std::isfinite(hi)) {
      v.offset = hi;
      v.minus = ncol++;
    } else {
      v.plus = ncol++;
      v.minus = ncol++;
    }
  }
  const int n_eq = static_cast<int>(p.a_eq.rows());
  const int n_in = static_cast<int>(p.a_in.rows());
  const int n_ub = static_cast<int>(ub_rows.size());
  const int m = n_eq + n_in + n_ub;
  const int slack0 = ncol;
  const int art0 = slack0 + n_in + n_ub;
  const int total = art0 + m;

  Tableau t(m, total);
  auto fill = [&](int r, const Eigen::Ref<const Eigen::RowVectorXd>& a, double b) {
    double shift = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double aj = a[j];
      if (aj == 0.0) continue;
      const VarMap& v = vars[static_cast<std::size_t>(j)];
      shift += aj * v.offset;
      if (v.plus >= 0) t.at(r, v.plus) += aj;
      if (v.minus >= 0) t.at(r, v.minus) -= aj;
    }
    t.rhs(r) = b - shift;
  };
  for (int r = 0; r < n_eq; ++r) fill(r, p.a_eq.row(r), p.b_eq[r]);
  for (int r = 0; r < n_in; ++r) {
    fill(n_eq + r, p.a_in.row(r), p.b_in[r]);
    t.at(n_eq + r, slack0 + r) = 1.0;
  }
  for (int k = 0; k < n_ub; ++k) {
    const int r = n_eq + n_in + k;
    t.at(r, ub_rows[static_cast<std::size_t>(k)].first) = 1.0;
    t.at(r, slack0 + n_in + k) = 1.0;
    t.rhs(r) = ub_rows[static_cast<std::size_t>(k)].second;
  }
  for (int r = 0; r < m; ++r) {
    if (t.rhs(r) < 0.0) {
      double* rr = t.row(r);
      for (int c = 0; c <= total; ++c) rr[c] = -rr[c];
    }
    t.at(r, art0 + r) = 1.0;
  }

  std::vector<int> basis(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) basis[static_cast<std::size_t>(r)] = art0 + r;

  // Phase 1: minimize the sum of artificials.
  for (int c = 0; c <= total; ++c) {
    double s = 0.0;
    for (int r = 0; r < m; ++r) s += t.at(r, c);
    t.at(m, c) = c >= art0 && c < total ? 0.0 : -s;
  }
  std::vector<char> allowed(static_cast<std::size_t>(total), 1);
  double scale = 1.0;
  for (int r = 0; r < m; ++r) scale = std::max(scale, std::abs(t.rhs(r)));
  Outcome o = run_simplex(t, basis, allowed, opt, result.iterations);
  if (o == Outcome::IterationLimit) return result;
  if (-t.rhs(m) > opt.feasibility_tol * scale) {
    result.status = LpStatus::Infeasible;
    return result;
  }
  // Drive zero-level artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (basis[static_cast<std::size_t>(r)] < art0) continue;
    int pc = -1;
    double best = opt.pivot_tol;
    for (int c = 0; c < art0; ++c)
      if (std::abs(t.at(r, c)) > best) {
        best = std::abs(t.at(r, c));
        pc = c;
      }
    if (pc >= 0) {
      t.pivot(r, pc);
      basis[static_cast<std::size_t>(r)] = pc;
    }
  }
  for (int c = art0; c < total; ++c) allowed[static_cast<std::size_t>(c)] = 0;

  // Phase 2 objective in terms of the non-basic columns.
  for (int c = 0; c <= total; ++c) t.at(m, c) = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& v = vars[static_cast<std::size_t>(j)];
    if (v.plus >= 0) t.at(m, v.plus) += p.c[j];
    if (v.minus >= 0) t.at(m, v.minus) -= p.c[j];
  }
  for (int r = 0; r < m; ++r) {
    const int b = basis[static_cast<std::size_t>(r)];
    const double f = t.at(m, b);
    if (f != 0.0) kernels::axpy(-f, t.row(r), t.row(m), static_cast<std::size_t>(total + 1));
  }
  o = run_simplex(t, basis, allowed, opt, result.iterations);
  if (o == Outcome::IterationLimit) return result;
  if (o == Outcome::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  std::vector<double> y(static_cast<std::size_t>(total), 0.0);
  for (int r = 0; r < m; ++r) y[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] = t.rhs(r);
  result.x.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& v = vars[static_cast<std::size_t>(j)];
    double x = v.offset;
    if (v.plus >= 0) x += y[static_cast<std::size_t>(v.plus)];
    if (v.minus >= 0) x -= y[static_cast<std::size_t>(v.minus)];
    result.x[j] = x;
  }
  result.objective = p.c.dot(result.x);
  result.status = LpStatus::Optimal;
  return result;
}

}  // namespace equiterm
