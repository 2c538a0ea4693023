#include <algorithm>
#include <cmath>
#include <limits>

#include "equiterm/equilibrium.hpp"
#include "equiterm/parallel.hpp"

namespace equiterm {

const char* to_string(Method m) {
  switch (m) {
    case Method::Tatonnement: return "tatonnement";
    case Method::Newton: return "newton";
    case Method::Hybrid: return "hybrid";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& s) {
  if (s == "tatonnement") return Method::Tatonnement;
  if (s == "newton") return Method::Newton;
  if (s == "hybrid") return Method::Hybrid;
  return std::nullopt;
}

const char* to_string(EquilibriumStatus s) {
  switch (s) {
    case EquilibriumStatus::Converged: return "converged";
    case EquilibriumStatus::MaxIterations: return "max-iterations";
    case EquilibriumStatus::SaturationWall: return "saturation-wall";
    case EquilibriumStatus::Stalled: return "stalled";
  }
  return "unknown";
}

ExcessVolumeMap::ExcessVolumeMap(const Market& market, PlayerOptions options)
    : market_(&market), options_(options) {
  solvers_.reserve(market.players.size());
  for (const PlayerProblem& p : market.players) solvers_.emplace_back(p, options);
}

ExcessVolumeMap::Evaluation ExcessVolumeMap::evaluate(const Eigen::VectorXd& prices) {
  Evaluation ev;
  ev.prices = prices;
  ev.solutions.resize(solvers_.size());
  parallel_for(solvers_.size(), [&](std::size_t k) { ev.solutions[k] = solvers_[k].solve(prices); });
  const Eigen::Index n = static_cast<Eigen::Index>(market_->contracts());
  ev.excess = Eigen::VectorXd::Zero(n);
  for (const PlayerSolution& s : ev.solutions) {
    ev.excess += s.primal.head(n);
    ev.max_kkt = std::max(ev.max_kkt, s.kkt_residual);
  }
  return ev;
}

ExcessVolumeMap::AggregateJacobian ExcessVolumeMap::jacobian(const Evaluation& at) const {
  AggregateJacobian j;
  const Eigen::Index n = static_cast<Eigen::Index>(market_->contracts());
  j.matrix = Eigen::MatrixXd::Zero(n, n);
  j.players.resize(solvers_.size());
  parallel_for(solvers_.size(), [&](std::size_t k) {
    j.players[k] = response_jacobian(market_->players[k], at.solutions[k], options_);
  });
  for (const ResponseJacobian& r : j.players) {
    j.matrix += r.matrix;
    j.singular = j.singular || r.singular;
    j.on_boundary = j.on_boundary || r.on_boundary;
  }
  return j;
}

Eigen::VectorXd excess_volume(const Market& market, const Eigen::VectorXd& prices) {
  ExcessVolumeMap map(market);
  return map(prices);
}

Eigen::VectorXd merit_order_prices(const Market& market) {
  const Scenario& s = market.scenario;
  const TradingGrid& grid = s.grid;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.contract_count()));
  for (std::size_t j = 0; j < grid.delivery_count(); ++j) {
    const std::size_t last = grid.node(j, grid.trading_count(j) - 1);
    double best = std::numeric_limits<double>::infinity();
    for (const Producer& prod : s.producers)
      for (const PowerPlant& plant : prod.plants) {
        const std::size_t l = s.fuel_index(plant.fuel);
        best = std::min(best, marginal_cost(plant, s.fuels[l], s.exogenous.fuel_forwards[l][last],
                                            s.exogenous.emission_forwards[last]));
      }
    if (!std::isfinite(best)) best = 0.0;
    for (std::size_t i = 0; i < grid.trading_count(j); ++i)
      p[static_cast<Eigen::Index>(grid.node(j, i))] = grid.discount(j) * best;
  }
  return p;
}

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

Eigen::VectorXd clamp(const Eigen::VectorXd& p, double bound) {
  return p.cwiseMax(-bound).cwiseMin(bound);
}

// Sum of the players' optimal values. Its gradient in the prices is minus the
// excess volume, and it is convex, so it serves as the line-search merit.
double merit(const ExcessVolumeMap::Evaluation& ev) {
  double v = 0.0;
  for (const PlayerSolution& s : ev.solutions) v += s.objective;
  return v;
}

// Newton direction on the selection Jacobian, regularized by mu * |Z| on the
// flat directions that saturated deliveries leave behind.
bool newton_direction(const Eigen::MatrixXd& jac, const Eigen::VectorXd& z, double mu, Eigen::VectorXd& d,
                      bool& shifted) {
  const double scale = jac.size() ? jac.cwiseAbs().maxCoeff() : 0.0;
  if (!(scale > 0.0)) return false;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
  qr.setThreshold(1e-12);
  shifted = qr.rank() < jac.rows();
  if (shifted) {
    Eigen::MatrixXd m = 0.5 * (jac + jac.transpose());
    m.diagonal().array() -= std::max(1e-10 * scale, mu * z.norm());
    qr.compute(m);
  }
  d = qr.solve(-z);
  return d.allFinite() && z.dot(d) > 0.0;
}

}  // namespace

EquilibriumResult solve_equilibrium(const Market& market, const EquilibriumOptions& opt) {
  EquilibriumResult res;
  res.method = opt.method;
  const double bound = market.scenario.bounds.pi_max;
  ExcessVolumeMap map(market, opt.player);

  Eigen::VectorXd p = opt.initial_prices ? *opt.initial_prices : merit_order_prices(market);
  p = clamp(p, bound);
  ExcessVolumeMap::Evaluation ev = map.evaluate(p);
  double r = inf_norm(ev.excess);
  res.trace.push_back({0, p, r, "start", 0.0});
  bool polished = false;
  bool stalled = false;
  // Levenberg factor: shrinks while shifted steps go through at full length.
  double mu = 1.0;

  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (r <= opt.tol) {
      if (ev.max_kkt <= opt.kkt_tol) break;
      if (polished) break;
      // Re-solve from cold starts once before giving up on the KKT target.
      ExcessVolumeMap fresh(market, opt.player);
      ev = fresh.evaluate(p);
      r = inf_norm(ev.excess);
      polished = true;
      continue;
    }
    const ExcessVolumeMap::AggregateJacobian jac = map.jacobian(ev);
    bool accepted = false;
    const double phi = merit(ev);

    // Projected Armijo test on the merit; near the root the merit differences
    // drown in round-off, so a sufficient drop of |Z| is accepted as well.
    auto acceptable = [&](const ExcessVolumeMap::Evaluation& tev, const Eigen::VectorXd& step, double alpha) {
      const double rt = inf_norm(tev.excess);
      const bool armijo = merit(tev) <= phi - 1e-4 * ev.excess.dot(step);
      const bool residual = rt <= (1.0 - 1e-4 * std::min(alpha, 1.0)) * r;
      if (opt.method != Method::Hybrid) return armijo || residual;
      return (armijo && rt <= r * (1.0 + 1e-12)) || residual;
    };

    auto try_step = [&](const Eigen::VectorXd& dir, double alpha0, const char* label) {
      double alpha = alpha0;
      for (int ls = 0; ls < 50; ++ls, alpha *= 0.5) {
        const Eigen::VectorXd trial = clamp(p + alpha * dir, bound);
        const Eigen::VectorXd step = trial - p;
        if (step.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + p.lpNorm<Eigen::Infinity>())) return false;
        ExcessVolumeMap::Evaluation tev = map.evaluate(trial);
        if (!acceptable(tev, step, alpha)) continue;
        p = trial;
        ev = std::move(tev);
        r = inf_norm(ev.excess);
        res.trace.push_back({it + 1, p, r, label, alpha});
        return true;
      }
      return false;
    };

    if (opt.method != Method::Tatonnement) {
      Eigen::VectorXd d;
      bool shifted = false;
      if (newton_direction(jac.matrix, ev.excess, mu, d, shifted)) {
        accepted = try_step(d, 1.0, "newton");
        if (shifted) mu = accepted && res.trace.back().step_length == 1.0 ? std::max(0.1 * mu, 1e-8) : std::min(10.0 * mu, 1.0);
      }
    }

    if (!accepted && opt.method != Method::Newton) {
      // Damped price adjustment along the excess volume.
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-0.5 * (jac.matrix + jac.matrix.transpose()),
                                                              Eigen::EigenvaluesOnly);
      const double lmax = es.eigenvalues().size() ? es.eigenvalues().maxCoeff() : 0.0;
      accepted = try_step(ev.excess, lmax > 0.0 ? 1.0 / lmax : 1.0, "tatonnement");
    }
    if (!accepted) {
      stalled = true;
      break;
    }
  }

  res.prices = p;
  res.excess = ev.excess;
  res.player_solutions = ev.solutions;
  res.clearing_residual = r;
  res.max_kkt_residual = ev.max_kkt;
  res.market_agent_objective = p.dot(ev.excess);
  res.iterations = static_cast<int>(res.trace.size()) - 1;
  if (r <= opt.tol && ev.max_kkt <= opt.kkt_tol) {
    res.status = EquilibriumStatus::Converged;
  } else if (detect_saturation(market, ev.solutions, opt.player).any_saturated()) {
    res.status = EquilibriumStatus::SaturationWall;
  } else {
    res.status = stalled ? EquilibriumStatus::Stalled : EquilibriumStatus::MaxIterations;
  }
  return res;
}

}  // namespace equiterm
