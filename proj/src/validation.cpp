#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "equiterm/assembly.hpp"
#include "equiterm/lp.hpp"
#include "equiterm/validation.hpp"

namespace equiterm {

bool ValidationReport::ok() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const ValidationCheck& c) { return !c.passed && c.severity == Severity::Error; });
}

std::vector<const ValidationCheck*> ValidationReport::failures() const {
  std::vector<const ValidationCheck*> out;
  for (const ValidationCheck& c : checks)
    if (!c.passed) out.push_back(&c);
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

class Collector {
 public:
  explicit Collector(ValidationReport& r) : r_(r) {}
  void error(const std::string& name, bool ok, const std::string& msg, std::optional<double> value = {}) {
    r_.checks.push_back({name, Severity::Error, ok, ok ? "" : msg, value});
  }
  void warning(const std::string& name, bool ok, const std::string& msg, std::optional<double> value = {}) {
    r_.checks.push_back({name, Severity::Warning, ok, ok ? "" : msg, value});
  }

 private:
  ValidationReport& r_;
};

bool structure(const Scenario& s, Collector& c) {
  bool ok = true;
  auto check = [&](const std::string& name, bool pass, const std::string& msg) {
    c.error(name, pass, msg);
    ok = ok && pass;
  };
  std::set<std::string> fuel_names;
  for (const Fuel& f : s.fuels) {
    check("fuel." + f.name, finite_positive(f.emission_intensity) && fuel_names.insert(f.name).second,
          "fuel '" + f.name + "' needs a unique name and emission intensity > 0");
  }
  check("fuels", !s.fuels.empty(), "at least one fuel is required");
  for (const Producer& p : s.producers) {
    check("producer." + p.name + ".risk_aversion", finite_positive(p.risk_aversion),
          "producer '" + p.name + "' needs risk aversion > 0");
    check("producer." + p.name + ".plants", !p.plants.empty(), "producer '" + p.name + "' has no plants");
    for (const PowerPlant& r : p.plants) {
      const std::string id = "producer." + p.name + ".plant." + r.name;
      check(id + ".fuel", fuel_names.count(r.fuel) == 1, "plant '" + r.name + "' uses unknown fuel '" + r.fuel + "'");
      check(id + ".capacity", finite_positive(r.capacity), "plant '" + r.name + "' needs capacity > 0");
      check(id + ".efficiency", finite_positive(r.efficiency), "plant '" + r.name + "' needs efficiency > 0");
      check(id + ".ramps", std::isfinite(r.ramp_up) && std::isfinite(r.ramp_down) && r.ramp_down <= 0.0 && r.ramp_up >= 0.0,
            "plant '" + r.name + "' needs ramp_down <= 0 <= ramp_up");
    }
  }
  double share = 0.0;
  for (const Consumer& k : s.consumers) {
    check("consumer." + k.name + ".risk_aversion", finite_positive(k.risk_aversion),
          "consumer '" + k.name + "' needs risk aversion > 0");
    check("consumer." + k.name + ".demand_share", k.demand_share >= 0.0 && k.demand_share <= 1.0,
          "consumer '" + k.name + "' needs demand share in [0, 1]");
    check("consumer." + k.name + ".retail_price", std::isfinite(k.retail_price),
          "consumer '" + k.name + "' needs a finite retail price");
    share += k.demand_share;
  }
  check("consumers.share_sum", std::abs(share - 1.0) <= 1e-12,
        "consumer demand shares must sum to 1 (got " + fmt(share) + ")");
  check("bounds", finite_positive(s.bounds.v_trade) && finite_positive(s.bounds.f_trade) &&
                      finite_positive(s.bounds.pi_max),
        "trading and price bounds must be finite and > 0");
  const std::size_t nj = s.grid.delivery_count();
  const std::size_t n = s.grid.contract_count();
  bool shapes = s.exogenous.demand.size() == nj && s.exogenous.fuel_forwards.size() == s.fuels.size() &&
                s.exogenous.emission_forwards.size() == n;
  for (const auto& curve : s.exogenous.fuel_forwards) shapes = shapes && curve.size() == n;
  check("exogenous.dimensions", shapes, "demand and forward curves do not match the grid");
  if (shapes) {
    bool finite = true;
    for (double d : s.exogenous.demand) finite = finite && std::isfinite(d) && d >= 0.0;
    for (const auto& curve : s.exogenous.fuel_forwards)
      for (double g : curve) finite = finite && std::isfinite(g);
    for (double g : s.exogenous.emission_forwards) finite = finite && std::isfinite(g);
    check("exogenous.values", finite, "demand must be finite and >= 0; forwards must be finite");
  }
  return ok;
}

// max t s.t. A v = a, B v + t <= b, t <= cap, for one or several stacked players.
double phase_one_margin(const std::vector<const PlayerProblem*>& players, bool clearing, std::size_t contracts,
                        double cap, bool& feasible) {
  Eigen::Index dim = 0, me = 0, mi = 0;
  for (const PlayerProblem* p : players) {
    dim += static_cast<Eigen::Index>(p->dimension());
    me += p->eq_matrix.rows();
    mi += p->ineq_matrix.rows();
  }
  const Eigen::Index nc = clearing ? static_cast<Eigen::Index>(contracts) : 0;
  LpProblem lp = LpProblem::free_variables(dim + 1);
  lp.c[dim] = -1.0;
  lp.upper[dim] = cap;
  lp.a_eq = Eigen::MatrixXd::Zero(me + nc, dim + 1);
  lp.b_eq = Eigen::VectorXd::Zero(me + nc);
  lp.a_in = Eigen::MatrixXd::Zero(mi, dim + 1);
  lp.b_in = Eigen::VectorXd::Zero(mi);
  Eigen::Index col = 0, re = 0, ri = 0;
  for (const PlayerProblem* p : players) {
    const Eigen::Index d = static_cast<Eigen::Index>(p->dimension());
    lp.a_eq.block(re, col, p->eq_matrix.rows(), d) = p->eq_matrix;
    lp.b_eq.segment(re, p->eq_matrix.rows()) = p->eq_rhs;
    lp.a_in.block(ri, col, p->ineq_matrix.rows(), d) = p->ineq_matrix;
    lp.a_in.block(ri, dim, p->ineq_matrix.rows(), 1).setOnes();
    lp.b_in.segment(ri, p->ineq_matrix.rows()) = p->ineq_rhs;
    for (Eigen::Index k = 0; k < nc; ++k) lp.a_eq(me + k, col + k) = 1.0;
    col += d;
    re += p->eq_matrix.rows();
    ri += p->ineq_matrix.rows();
  }
  const LpResult r = solve_lp(lp);
  feasible = r.status == LpStatus::Optimal;
  return feasible ? r.x[dim] : -std::numeric_limits<double>::infinity();
}

}  // namespace

ValidationReport validate_scenario(const Scenario& s, const ValidationOptions& opt) {
  ValidationReport rep;
  Collector c(rep);
  if (!structure(s, c)) return rep;

  const std::size_t nj = s.grid.delivery_count();
  const double capacity = s.total_capacity();
  for (std::size_t j = 0; j < nj; ++j) {
    const double d = s.exogenous.demand[j];
    c.error("slater.capacity." + std::to_string(j), d < capacity,
            "infeasible: demand " + fmt(d) + " in delivery " + std::to_string(j) +
                " is not strictly below total capacity " + fmt(capacity),
            capacity - d);
  }

  ResolvedCovariance cov = resolve_covariance(s);
  rep.covariance = cov.report;
  c.error("covariance.positive_definite", cov.report.ok, cov.report.message, cov.report.min_eigenvalue);

  // Constraint structure does not depend on the covariance.
  const std::size_t n = s.grid.contract_count();
  const std::size_t dim = n * (s.fuels.size() + 2);
  const Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<PlayerProblem> players;
  try {
    for (const Producer& p : s.producers) players.push_back(assemble_producer(p, s, unit));
    for (const Consumer& k : s.consumers) players.push_back(assemble_consumer(k, s, unit));
  } catch (const ModelError& e) {
    c.error("assembly", false, e.what());
    return rep;
  }

  std::vector<const PlayerProblem*> all;
  for (const PlayerProblem& p : players) {
    bool feasible = false;
    const double margin = phase_one_margin({&p}, false, n, opt.margin_cap, feasible);
    rep.player_margins.push_back(margin);
    const std::string who = (p.kind == PlayerKind::Producer ? "producer '" : "consumer '") + p.name + "'";
    c.error("slater.interior." + p.name, feasible && margin >= opt.feas_margin,
            feasible ? "infeasible: " + who + " has no strictly feasible plan (margin " + fmt(margin) + ")"
                     : "infeasible: " + who + " has an empty feasible set",
            feasible ? std::optional<double>(margin) : std::nullopt);
    all.push_back(&p);
  }
  if (!players.empty()) {
    bool feasible = false;
    const double margin = phase_one_margin(all, true, n, opt.margin_cap, feasible);
    if (feasible) rep.joint_margin = margin;
    c.error("slater.clearing", feasible && margin >= opt.feas_margin,
            feasible ? "infeasible: market clearing has no strictly interior plans (margin " + fmt(margin) + ")"
                     : "infeasible: market clearing is infeasible for the given demand and plants",
            rep.joint_margin);
  }

  if (cov.report.ok) {
    // Rough a-priori sizes of equilibrium quantities; bounds well above them stay slack.
    const Eigen::Index ni = static_cast<Eigen::Index>(n);
    const Eigen::MatrixXd& q = cov.matrix;
    const Eigen::MatrixXd q1 = q.topLeftCorner(ni, ni);
    const Eigen::MatrixXd q2 = q.topRightCorner(ni, q.cols() - ni);
    const Eigen::MatrixXd q3 = q.bottomRightCorner(q.rows() - ni, q.cols() - ni);
    const double max_demand = *std::max_element(s.exogenous.demand.begin(), s.exogenous.demand.end());
    const double volume = max_demand + capacity;
    double fuel_need = 0.0, emission_need = 0.0, max_mc = 0.0, max_lambda = 0.0;
    for (const Producer& p : s.producers) {
      max_lambda = std::max(max_lambda, p.risk_aversion);
      for (const PowerPlant& r : p.plants) {
        const std::size_t l = s.fuel_index(r.fuel);
        fuel_need += r.efficiency * r.capacity;
        emission_need += s.fuels[l].emission_intensity * r.capacity * static_cast<double>(nj);
        for (std::size_t node = 0; node < n; ++node)
          max_mc = std::max(max_mc, std::abs(marginal_cost(r, s.fuels[l], s.exogenous.fuel_forwards[l][node],
                                                           s.exogenous.emission_forwards[node])));
      }
    }
    for (const Consumer& k : s.consumers) max_lambda = std::max(max_lambda, k.risk_aversion);
    const double hedge = q3.ldlt().solve(q2.transpose()).cwiseAbs().rowwise().sum().maxCoeff() * volume;
    BoundHeuristics h;
    h.v_trade = 10.0 * volume;
    h.f_trade = 10.0 * (std::max(fuel_need, emission_need) + hedge);
    h.pi_max = 10.0 * (max_mc + max_lambda * q1.cwiseAbs().rowwise().sum().maxCoeff() * volume);
    rep.suggested_bounds = h;
    c.warning("bounds.v_trade", s.bounds.v_trade >= h.v_trade,
              "V_trade " + fmt(s.bounds.v_trade) + " may bind in equilibrium (suggested >= " + fmt(h.v_trade) + ")",
              h.v_trade);
    c.warning("bounds.f_trade", s.bounds.f_trade >= h.f_trade,
              "F_trade " + fmt(s.bounds.f_trade) + " may bind in equilibrium (suggested >= " + fmt(h.f_trade) + ")",
              h.f_trade);
    c.warning("bounds.pi_max", s.bounds.pi_max >= h.pi_max,
              "Pi_max " + fmt(s.bounds.pi_max) + " may bind in equilibrium (suggested >= " + fmt(h.pi_max) + ")",
              h.pi_max);
  }
  return rep;
}

}  // namespace equiterm
