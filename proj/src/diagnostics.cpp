#include <algorithm>
#include <cmath>
#include <random>

#include "equiterm/equilibrium.hpp"

namespace equiterm {

const char* to_string(DeliveryStatus s) {
  switch (s) {
    case DeliveryStatus::Interior: return "interior";
    case DeliveryStatus::AllUpper: return "all-upper";
    case DeliveryStatus::AllLower: return "all-lower";
    case DeliveryStatus::AllBounded: return "all-bounded";
  }
  return "unknown";
}

bool SaturationReport::any_saturated() const {
  return std::any_of(status.begin(), status.end(), [](DeliveryStatus s) { return s != DeliveryStatus::Interior; });
}

bool SaturationReport::consistent() const {
  return std::all_of(sign_consistent.begin(), sign_consistent.end(), [](bool b) { return b; });
}

bool DiagnosticsReport::strict_uniqueness() const {
  const bool feasible_plants = std::all_of(strictly_feasible_plant_per_period.begin(),
                                           strictly_feasible_plant_per_period.end(), [](bool b) { return b; });
  return monotone && jacobian_eigen_max.has_value() && *jacobian_eigen_max < 0.0 && rank_condition &&
         feasible_plants && !saturation_events.any_saturated();
}

namespace {

bool tight(const PlayerProblem& p, const Eigen::VectorXd& slack, std::size_t row, double tol) {
  return slack[static_cast<Eigen::Index>(row)] <= tol * (1.0 + std::abs(p.ineq_rhs[static_cast<Eigen::Index>(row)]));
}

// For every producer slot and delivery: capacity-bound flags and strict interiority.
struct PlantState {
  std::vector<std::vector<bool>> at_upper, at_lower, strictly_inside;  // [delivery][plant]
};

PlantState plant_state(const Market& m, const std::vector<PlayerSolution>& sol, const PlayerOptions& opt) {
  const std::size_t nj = m.scenario.grid.delivery_count();
  PlantState st;
  st.at_upper.resize(nj);
  st.at_lower.resize(nj);
  st.strictly_inside.resize(nj);
  for (std::size_t k = 0; k < m.players.size(); ++k) {
    const PlayerProblem& p = m.players[k];
    if (p.kind != PlayerKind::Producer) continue;
    const Eigen::VectorXd slack = p.ineq_rhs - p.ineq_matrix * sol[k].primal;
    const std::size_t slots = p.index_map.plant_count();
    std::vector<std::vector<bool>> upper(nj, std::vector<bool>(slots, false)), lower = upper, touched = upper;
    for (std::size_t row = 0; row < p.ineq_tags.size(); ++row) {
      const RowTag& t = p.ineq_tags[row];
      if (!tight(p, slack, row, opt.activity_tol)) continue;
      switch (t.kind) {
        case RowKind::CapacityUpper:
          upper[t.delivery][t.slot] = true;
          touched[t.delivery][t.slot] = true;
          break;
        case RowKind::CapacityLower:
          lower[t.delivery][t.slot] = true;
          touched[t.delivery][t.slot] = true;
          break;
        case RowKind::RampUp:
        case RowKind::RampDown:
          touched[t.delivery][t.slot] = true;
          touched[t.delivery + 1][t.slot] = true;
          break;
        default:
          break;
      }
    }
    for (std::size_t j = 0; j < nj; ++j)
      for (std::size_t s = 0; s < slots; ++s) {
        st.at_upper[j].push_back(upper[j][s]);
        st.at_lower[j].push_back(lower[j][s]);
        st.strictly_inside[j].push_back(!touched[j][s]);
      }
  }
  return st;
}

}  // namespace

SaturationReport detect_saturation(const Market& m, const std::vector<PlayerSolution>& sol,
                                   const PlayerOptions& opt) {
  const TradingGrid& grid = m.scenario.grid;
  const std::size_t nj = grid.delivery_count();
  const PlantState st = plant_state(m, sol, opt);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.contract_count()));
  for (const PlayerSolution& s : sol) z += s.primal.head(z.size());

  SaturationReport r;
  for (std::size_t j = 0; j < nj; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.trading_count(j); ++i) sum += z[static_cast<Eigen::Index>(grid.node(j, i))];
    const bool any = !st.at_upper[j].empty();
    const bool up = any && std::all_of(st.at_upper[j].begin(), st.at_upper[j].end(), [](bool b) { return b; });
    const bool lo = any && std::all_of(st.at_lower[j].begin(), st.at_lower[j].end(), [](bool b) { return b; });
    bool bounded = any;
    for (std::size_t k = 0; k < st.at_upper[j].size(); ++k) bounded = bounded && (st.at_upper[j][k] || st.at_lower[j][k]);
    DeliveryStatus s = DeliveryStatus::Interior;
    if (up) s = DeliveryStatus::AllUpper;
    else if (lo) s = DeliveryStatus::AllLower;
    else if (bounded) s = DeliveryStatus::AllBounded;
    r.status.push_back(s);
    r.clearing_sums.push_back(sum);
    r.sign_consistent.push_back(s == DeliveryStatus::Interior || s == DeliveryStatus::AllBounded || (s == DeliveryStatus::AllUpper && sum < 0.0) ||
                                (s == DeliveryStatus::AllLower && sum > 0.0));
  }
  return r;
}

SaturationReport detect_saturation(const Market& m, const Eigen::VectorXd& prices, const PlayerOptions& opt) {
  std::vector<PlayerSolution> sol;
  for (const PlayerProblem& p : m.players) sol.push_back(solve_qp(p, prices, opt));
  return detect_saturation(m, sol, opt);
}

std::size_t producer_rank(const Market& m, const std::vector<ResponseJacobian>& jac) {
  const Eigen::Index nj = m.a1.rows();
  Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(nj, nj);
  for (std::size_t k = 0; k < m.players.size(); ++k)
    if (m.players[k].kind == PlayerKind::Producer) agg += m.a1 * jac[k].matrix * m.a1.transpose();
  // Scale reference: the consumers' curvature, so an all-zero aggregate has rank 0.
  double ref = agg.cwiseAbs().maxCoeff();
  for (std::size_t k = 0; k < m.players.size(); ++k) ref = std::max(ref, jac[k].matrix.cwiseAbs().maxCoeff());
  if (!(ref > 0.0)) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(agg);
  const Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < diag.size(); ++i)
    if (diag[i] > 1e-9 * ref) ++rank;
  return rank;
}

DiagnosticsReport check_uniqueness(const Market& m, const Eigen::VectorXd& prices, const UniquenessOptions& opt) {
  DiagnosticsReport rep;
  rep.delivery_count = m.scenario.grid.delivery_count();
  ExcessVolumeMap map(m, opt.player);
  const ExcessVolumeMap::Evaluation at = map.evaluate(prices);
  const ExcessVolumeMap::AggregateJacobian jac = map.jacobian(at);

  rep.jacobian_degenerate = jac.on_boundary;
  const Eigen::MatrixXd sym = 0.5 * (jac.matrix + jac.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  rep.jacobian_eigen_max = es.eigenvalues().maxCoeff();
  rep.rank = producer_rank(m, jac.players);
  rep.rank_condition = rep.rank == rep.delivery_count;

  const PlantState st = plant_state(m, at.solutions, opt.player);
  for (std::size_t j = 0; j < rep.delivery_count; ++j)
    rep.strictly_feasible_plant_per_period.push_back(
        std::any_of(st.strictly_inside[j].begin(), st.strictly_inside[j].end(), [](bool b) { return b; }));
  rep.saturation_events = detect_saturation(m, at.solutions, opt.player);

  // The radius halves whenever a window of draws mostly lands on the saturation set.
  double radius = opt.radius > 0.0 ? opt.radius : 0.2 * (1.0 + prices.cwiseAbs().maxCoeff());
  const double min_radius = 1e-6 * (1.0 + prices.cwiseAbs().maxCoeff());
  const double bound = m.scenario.bounds.pi_max;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&] {
    Eigen::VectorXd x(prices.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(rng);
    return Eigen::VectorXd((prices + radius * x).cwiseMax(-bound).cwiseMin(bound));
  };
  auto saturated = [&](const ExcessVolumeMap::Evaluation& e) {
    return detect_saturation(m, e.solutions, opt.player).any_saturated();
  };
  rep.monotone = true;
  std::size_t attempts = 0, window = 0, window_hits = 0;
  while (rep.monotonicity_samples.size() < opt.samples && attempts < 20 * opt.samples + 100) {
    ++attempts;
    if (++window > 20) {
      if (window_hits < 5 && radius > min_radius) radius = std::max(0.5 * radius, min_radius);
      window = 1;
      window_hits = 0;
    }
    const Eigen::VectorXd x = draw();
    const Eigen::VectorXd y = draw();
    const ExcessVolumeMap::Evaluation ex = map.evaluate(x);
    if (saturated(ex)) {
      ++rep.skipped_saturated;
      continue;
    }
    const ExcessVolumeMap::Evaluation ey = map.evaluate(y);
    if (saturated(ey)) {
      ++rep.skipped_saturated;
      continue;
    }
    ++window_hits;
    const double ip = (ex.excess - ey.excess).dot(x - y);
    rep.monotone = rep.monotone && ip < 0.0;
    rep.monotonicity_samples.push_back({x, y, ip});
  }
  rep.sample_radius = radius;
  if (rep.monotonicity_samples.size() < opt.samples) rep.monotone = false;
  return rep;
}

}  // namespace equiterm
