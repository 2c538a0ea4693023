#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "equiterm/lp.hpp"
#include "equiterm/oracles.hpp"

namespace equiterm {

double harmonic_risk_aversion(const std::vector<double>& lambdas) {
  double s = 0.0;
  for (double l : lambdas) s += 1.0 / l;
  return 1.0 / s;
}

double two_stage_price(const TwoStageParams& p) {
  double cost = 0.0;
  for (double c : p.cost_covariances) cost += c;
  return p.expected_t2_price + harmonic_risk_aversion(p.lambdas) * (cost - p.retail * p.demand_covariance);
}

TwoStageCheck two_stage_cross_check(const Market& m, const EquilibriumOptions& opt) {
  TwoStageCheck out;
  out.equilibrium = solve_equilibrium(m, opt);
  const EquilibriumResult& eq = out.equilibrium;
  const Scenario& s = m.scenario;
  const TradingGrid& grid = s.grid;
  const Eigen::Index n = static_cast<Eigen::Index>(grid.contract_count());
  const Eigen::Index nfo = m.covariance.cols() - n;
  const Eigen::MatrixXd q2 = m.covariance.topRightCorner(n, nfo);

  std::vector<double> lambdas;
  for (const PlayerProblem& p : m.players) lambdas.push_back(p.risk_aversion);
  double retail = 0.0;
  for (const Consumer& c : s.consumers) retail += c.retail_price * c.demand_share;

  // Procurement plans with each delivery's forward total held fixed.
  std::vector<Eigen::VectorXd> procurement;
  for (std::size_t k = 0; k < m.players.size(); ++k) {
    const PlayerProblem& p = m.players[k];
    if (p.kind != PlayerKind::Producer) continue;
    PlayerProblem fixed = p;
    const Eigen::Index rows = p.eq_matrix.rows();
    const Eigen::Index nj = static_cast<Eigen::Index>(grid.delivery_count());
    fixed.eq_matrix.conservativeResize(rows + nj, Eigen::NoChange);
    fixed.eq_rhs.conservativeResize(rows + nj);
    fixed.eq_matrix.bottomRows(nj).setZero();
    for (Eigen::Index j = 0; j < nj; ++j) {
      double total = 0.0;
      for (std::size_t i = 0; i < grid.trading_count(static_cast<std::size_t>(j)); ++i) {
        const Eigen::Index node = static_cast<Eigen::Index>(grid.node(static_cast<std::size_t>(j), i));
        fixed.eq_matrix(rows + j, node) = 1.0;
        total += eq.player_solutions[k].primal[node];
      }
      fixed.eq_rhs[rows + j] = total;
      fixed.eq_tags.push_back({RowKind::VolumeBalance, static_cast<std::size_t>(j), 0, 0, 0});
    }
    procurement.push_back(solve_qp(fixed, eq.prices, opt.player).primal.segment(n, nfo));
  }

  for (std::size_t j = 0; j < grid.delivery_count(); ++j) {
    if (grid.trading_count(j) != 2) continue;
    TwoStageDelivery d;
    d.delivery = j;
    const Eigen::Index a = static_cast<Eigen::Index>(grid.node(j, 0));
    const Eigen::Index b = static_cast<Eigen::Index>(grid.node(j, 1));
    d.solver_first = eq.prices[a];
    d.solver_second = eq.prices[b];
    const Eigen::RowVectorXd u = q2.row(b) - q2.row(a);
    d.params.expected_t2_price = eq.prices[b];
    d.params.lambdas = lambdas;
    d.params.retail = retail;
    for (const Eigen::VectorXd& y : procurement) d.params.cost_covariances.push_back(u.dot(y));
    d.closed_form_first = two_stage_price(d.params);
    d.relative_error = std::abs(d.closed_form_first - d.solver_first) / std::max(std::abs(d.solver_first), 1e-12);

    d.interior = true;
    for (std::size_t k = 0; k < m.players.size(); ++k) {
      const PlayerProblem& p = m.players[k];
      const PlayerSolution& sol = eq.player_solutions[k];
      for (Eigen::Index node : {a, b})
        if (std::abs(sol.primal[node]) >= s.bounds.v_trade * (1.0 - 1e-9)) d.interior = false;
      for (std::size_t row : sol.active_set) {
        const RowTag& t = p.ineq_tags[row];
        const bool plant_row = t.kind == RowKind::CapacityUpper || t.kind == RowKind::CapacityLower;
        if (plant_row && t.delivery == j && sol.ineq_duals[static_cast<Eigen::Index>(row)] <= opt.player.dual_tol)
          d.kink = true;
      }
    }
    out.max_relative_error = std::max(out.max_relative_error, d.relative_error);
    out.deliveries.push_back(d);
  }
  return out;
}

const char* to_string(Multiplicity m) {
  switch (m) {
    case Multiplicity::None: return "none";
    case Multiplicity::Price: return "price (vertical)";
    case Multiplicity::Volume: return "volume (horizontal)";
  }
  return "unknown";
}

namespace {

struct SupplyRange {
  double min = 0.0;
  double max = 0.0;
};

class SupplyOracle {
 public:
  SupplyOracle(const Scenario& s, double side_offset) : s_(s), tol_(side_offset) {
    const std::size_t dim = s.grid.contract_count() * (s.fuels.size() + 2);
    const Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const Producer& p : s.producers) producers_.push_back(assemble_producer(p, s, unit));
  }

  Eigen::VectorXd node_prices(const Eigen::VectorXd& delivery_prices) const {
    Eigen::VectorXd p(static_cast<Eigen::Index>(s_.grid.contract_count()));
    for (std::size_t node = 0; node < s_.grid.contract_count(); ++node)
      p[static_cast<Eigen::Index>(node)] = delivery_prices[static_cast<Eigen::Index>(s_.grid.delivery_of(node))];
    return p;
  }

  // Total production in delivery j at an optimal vertex of every producer LP.
  double production(const Eigen::VectorXd& delivery_prices, std::size_t j) const {
    const Eigen::VectorXd prices = node_prices(delivery_prices);
    double total = 0.0;
    for (const PlayerProblem& p : producers_) {
      LpProblem lp = LpProblem::free_variables(static_cast<Eigen::Index>(p.dimension()));
      lp.c = p.linear_at(prices);
      lp.a_eq = p.eq_matrix;
      lp.b_eq = p.eq_rhs;
      lp.a_in = p.ineq_matrix;
      lp.b_in = p.ineq_rhs;
      const LpResult r = solve_lp(lp);
      if (r.status != LpStatus::Optimal) throw std::runtime_error("mean-max: producer LP failed");
      for (std::size_t k = 0; k < p.index_map.plant_count(); ++k) total += r.x[static_cast<Eigen::Index>(p.index_map.production(j, k))];
    }
    return total;
  }

  // Production just below and just above the delivery price: the one-sided
  // limits of the supply step at that price.
  SupplyRange range(const Eigen::VectorXd& delivery_prices, std::size_t j) const {
    const double rho = delivery_prices[static_cast<Eigen::Index>(j)];
    const double delta = tol_ * (1.0 + std::abs(rho));
    Eigen::VectorXd shifted = delivery_prices;
    shifted[static_cast<Eigen::Index>(j)] = rho - delta;
    const double below = production(shifted, j);
    shifted[static_cast<Eigen::Index>(j)] = rho + delta;
    const double above = production(shifted, j);
    return {std::min(below, above), std::max(below, above)};
  }

 private:
  const Scenario& s_;
  double tol_;
  std::vector<PlayerProblem> producers_;
};

}  // namespace

MeanMaxResult mean_max_equilibrium(const Scenario& s, const MeanMaxOptions& opt) {
  MeanMaxResult out;
  const TradingGrid& grid = s.grid;
  const std::size_t nj = grid.delivery_count();
  const double bound = s.bounds.pi_max;
  SupplyOracle supply(s, opt.side_offset);
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nj));
  out.deliveries.resize(nj);

  auto width_ok = [&](double a, double b) { return b - a <= opt.price_tol * (1.0 + std::max(std::abs(a), std::abs(b))); };
  for (out.sweeps = 1; out.sweeps <= opt.max_sweeps; ++out.sweeps) {
    double change = 0.0;
    for (std::size_t j = 0; j < nj; ++j) {
      const double demand = s.exogenous.demand[j];
      Eigen::VectorXd trial = rho;
      auto supply_at = [&](double x) {
        trial[static_cast<Eigen::Index>(j)] = x;
        return supply.production(trial, j);
      };
      const double vtol = opt.volume_tol * (1.0 + demand);
      if (supply_at(bound) < demand - vtol) {
        out.message = "delivery " + std::to_string(j) + ": demand exceeds the producible volume";
        out.converged = false;
        return out;
      }
      // Lowest price at which supply reaches demand.
      double lo = -bound, hi = bound;
      if (supply_at(lo) >= demand - vtol) hi = lo;
      while (!width_ok(lo, hi)) {
        const double mid = 0.5 * (lo + hi);
        (supply_at(mid) >= demand - vtol ? hi : lo) = mid;
      }
      const double p_low = hi;
      // Highest price at which supply still does not exceed demand.
      lo = -bound;
      hi = bound;
      if (supply_at(hi) <= demand + vtol) lo = hi;
      while (!width_ok(lo, hi)) {
        const double mid = 0.5 * (lo + hi);
        (supply_at(mid) <= demand + vtol ? lo : hi) = mid;
      }
      const double p_high = std::max(lo, p_low);
      const double price = 0.5 * (p_low + p_high);
      change = std::max(change, std::abs(price - rho[static_cast<Eigen::Index>(j)]));
      rho[static_cast<Eigen::Index>(j)] = price;

      MeanMaxDelivery& d = out.deliveries[j];
      d.price = price;
      d.price_low = p_low;
      d.price_high = p_high;
      d.demand = demand;
    }
    if (change <= 1e-9 * (1.0 + rho.cwiseAbs().maxCoeff()) && out.sweeps > 1) {
      out.converged = true;
      break;
    }
    if (nj == 1) {
      out.converged = true;
      break;
    }
  }
  if (out.sweeps > opt.max_sweeps) out.sweeps = opt.max_sweeps;

  for (std::size_t j = 0; j < nj; ++j) {
    MeanMaxDelivery& d = out.deliveries[j];
    const SupplyRange r = supply.range(rho, j);
    d.supply_min = r.min;
    d.supply_max = r.max;
    const double vtol = opt.volume_tol * (1.0 + d.demand);
    d.clears = r.min <= d.demand + vtol && d.demand <= r.max + vtol;
    if (d.price_high - d.price_low > opt.interval_tol * (1.0 + std::abs(d.price))) d.multiplicity = Multiplicity::Price;
    else if (r.max - r.min > vtol) d.multiplicity = Multiplicity::Volume;
    out.converged = out.converged && d.clears;
  }
  out.prices = supply.node_prices(rho);
  for (std::size_t j = 0; j < nj; ++j) {
    const Eigen::VectorXd seg = out.prices.segment(static_cast<Eigen::Index>(grid.first_node(j)),
                                                   static_cast<Eigen::Index>(grid.trading_count(j)));
    out.max_spread = std::max(out.max_spread, seg.maxCoeff() - seg.minCoeff());
  }
  if (!out.converged && out.message.empty()) out.message = "price sweeps did not settle or a delivery does not clear";
  return out;
}

BruteForceResult brute_force_equilibrium(const Market& m, const GridSpec& spec) {
  const std::size_t n = m.contracts();
  if (n > 3) throw std::invalid_argument("brute-force oracle supports at most 3 contracts");
  if (!(spec.step > 0.0)) throw std::invalid_argument("grid step must be positive");
  const double bound = m.scenario.bounds.pi_max;
  const long kmax = static_cast<long>(std::floor(2.0 * bound / spec.step + 1e-9));
  using Index = std::vector<long>;

  ExcessVolumeMap map(m);
  BruteForceResult best;
  best.residual = std::numeric_limits<double>::infinity();
  std::map<Index, double> seen;
  std::map<Index, Eigen::VectorXd> excess_at;
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> cuts;
  auto price = [&](const Index& k) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) p[static_cast<Eigen::Index>(i)] = -bound + static_cast<double>(k[i]) * spec.step;
    return p;
  };
  auto eval = [&](const Index& k) {
    auto it = seen.find(k);
    if (it != seen.end()) return it->second;
    const Eigen::VectorXd p = price(k);
    ExcessVolumeMap::Evaluation ev = map.evaluate(p);
    const double r = ev.excess.lpNorm<Eigen::Infinity>();
    ++best.evaluations;
    seen.emplace(k, r);
    excess_at.emplace(k, ev.excess);
    cuts.emplace_back(p, ev.excess);
    if (r < best.residual) {
      best.residual = r;
      best.prices = p;
      best.excess = ev.excess;
      best.solutions = std::move(ev.solutions);
    }
    return r;
  };
  // Visit every point of the box [lo, hi] (per axis) with the given stride.
  auto scan = [&](const Index& lo, const Index& hi, long stride, std::vector<std::pair<double, Index>>& out,
                  const std::function<bool(const Index&)>& keep = {}) {
    Index k = lo;
    while (true) {
      if (!keep || keep(k)) out.emplace_back(eval(k), k);
      std::size_t axis = 0;
      for (; axis < n; ++axis) {
        if (k[axis] < hi[axis]) {
          k[axis] = std::min(k[axis] + stride, hi[axis]);
          break;
        }
        k[axis] = lo[axis];
      }
      if (axis == n) break;
    }
  };

  const double total = std::pow(static_cast<double>(kmax + 1), static_cast<double>(n));
  std::vector<std::pair<double, Index>> level;
  // Z is affine on a lattice cell inside one selection, so the cell holds a root
  // exactly when 0 lies in the convex hull of its corner values; every corner
  // of such a cell is within one step of that root.
  auto bracketing_pick = [&] {
    const std::size_t corners = std::size_t{1} << n;
    double pick = std::numeric_limits<double>::infinity();
    Index chosen;
    for (const auto& [base, z0] : excess_at) {
      std::vector<const Eigen::VectorXd*> zc;
      std::vector<Index> idx;
      for (std::size_t mask = 0; mask < corners; ++mask) {
        Index k = base;
        for (std::size_t i = 0; i < n; ++i)
          if (mask >> i & 1) ++k[i];
        auto it = excess_at.find(k);
        if (it == excess_at.end()) break;
        zc.push_back(&it->second);
        idx.push_back(k);
      }
      if (zc.size() != corners) continue;
      LpProblem lp;
      lp.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(corners));
      lp.a_eq = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n) + 1, static_cast<Eigen::Index>(corners));
      for (std::size_t c = 0; c < corners; ++c) lp.a_eq.col(static_cast<Eigen::Index>(c)).head(static_cast<Eigen::Index>(n)) = *zc[c];
      lp.b_eq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) + 1);
      lp.b_eq[static_cast<Eigen::Index>(n)] = 1.0;
      lp.a_in.resize(0, static_cast<Eigen::Index>(corners));
      lp.b_in.resize(0);
      lp.lower = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(corners));
      lp.upper = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(corners));
      if (solve_lp(lp).status != LpStatus::Optimal) continue;
      for (const Index& k : idx)
        if (seen[k] < pick) {
          pick = seen[k];
          chosen = k;
        }
    }
    if (chosen.empty()) return;
    best.prices = price(chosen);
    best.excess = excess_at[chosen];
    best.residual = pick;
    best.bracketed = true;
    best.solutions = map.evaluate(best.prices).solutions;
  };

  if (total <= static_cast<double>(spec.exhaustive_limit)) {
    scan(Index(n, 0), Index(n, kmax), 1, level);
    bracketing_pick();
    return best;
  }

  // Weak monotonicity of the excess map gives Z(y).(x* - y) >= 0 at every
  // evaluated y, so each evaluation cuts away a half-space of the lattice.
  auto admissible = [&](const Index& k, long stride) {
    const Eigen::VectorXd x = price(k);
    for (const auto& [y, z] : cuts) {
      const double slack = z.lpNorm<1>() * static_cast<double>(stride) * spec.step + 1e-9 * (1.0 + z.norm() * (x - y).norm());
      if (z.dot(x - y) < -slack) return false;
    }
    return true;
  };

  long stride = 1;
  while (kmax / stride > static_cast<long>(spec.coarse_points)) stride *= 10;
  Index lo(n, 0), hi(n, kmax);
  scan(lo, hi, stride, level);
  while (stride > 1) {
    // Bounding box of the admissible points of this level, widened by one stride.
    Index blo(n, kmax), bhi(n, 0);
    bool any = false;
    for (const auto& entry : level) {
      if (!admissible(entry.second, stride)) continue;
      any = true;
      for (std::size_t i = 0; i < n; ++i) {
        blo[i] = std::min(blo[i], entry.second[i]);
        bhi[i] = std::max(bhi[i], entry.second[i]);
      }
    }
    if (!any && level.empty()) {
      blo = lo;
      bhi = hi;
    } else if (!any) {
      std::sort(level.begin(), level.end());
      for (std::size_t c = 0; c < std::min(spec.candidates, level.size()); ++c)
        for (std::size_t i = 0; i < n; ++i) {
          blo[i] = std::min(blo[i], level[c].second[i]);
          bhi[i] = std::max(bhi[i], level[c].second[i]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::max(0L, blo[i] - stride);
      hi[i] = std::min(kmax, bhi[i] + stride);
    }
    const long next = stride / 10;
    level.clear();
    scan(lo, hi, next, level, [&](const Index& k) { return admissible(k, next); });
    stride = next;
  }
  bracketing_pick();
  return best;
}

}  // namespace equiterm
