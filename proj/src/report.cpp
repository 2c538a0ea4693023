#include "equiterm/report.hpp"

#include <iomanip>
#include <sstream>

namespace equiterm {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const PdReport& r) {
  return {{"ok", r.ok},
          {"min_eigenvalue", r.min_eigenvalue},
          {"max_eigenvalue", r.max_eigenvalue},
          {"ridge", r.ridge},
          {"message", r.message}};
}

json to_json(const ValidationReport& r) {
  json checks = json::array();
  for (const ValidationCheck& c : r.checks) {
    json x = {{"name", c.name},
              {"severity", c.severity == Severity::Error ? "error" : "warning"},
              {"passed", c.passed},
              {"message", c.message}};
    if (c.value) x["value"] = *c.value;
    checks.push_back(x);
  }
  json out = {{"ok", r.ok()}, {"checks", checks}, {"player_margins", r.player_margins}, {"covariance", to_json(r.covariance)}};
  if (r.joint_margin) out["joint_margin"] = *r.joint_margin;
  if (r.suggested_bounds)
    out["suggested_bounds"] = {{"v_trade", r.suggested_bounds->v_trade},
                               {"f_trade", r.suggested_bounds->f_trade},
                               {"pi_max", r.suggested_bounds->pi_max}};
  return out;
}

namespace {

json solution_json(const PlayerSolution& s) {
  return {{"primal", to_json(s.primal)},
          {"eq_duals", to_json(s.eq_duals)},
          {"ineq_duals", to_json(s.ineq_duals)},
          {"active_set", s.active_set},
          {"objective", s.objective},
          {"kkt_residual", s.kkt_residual},
          {"iterations", s.iterations}};
}

}  // namespace

json to_json(const EquilibriumResult& r, bool with_trace) {
  json players = json::array();
  for (const PlayerSolution& s : r.player_solutions) players.push_back(solution_json(s));
  json out = {{"status", to_string(r.status)},
              {"converged", r.converged()},
              {"method", to_string(r.method)},
              {"iterations", r.iterations},
              {"prices", to_json(r.prices)},
              {"excess", to_json(r.excess)},
              {"clearing_residual", r.clearing_residual},
              {"max_kkt_residual", r.max_kkt_residual},
              {"market_agent_objective", r.market_agent_objective},
              {"players", players}};
  if (with_trace) {
    json trace = json::array();
    for (const TraceEntry& t : r.trace)
      trace.push_back({{"iteration", t.iteration},
                       {"prices", to_json(t.prices)},
                       {"residual", t.residual},
                       {"step", t.step},
                       {"step_length", t.step_length}});
    out["trace"] = trace;
  }
  return out;
}

json to_json(const SaturationReport& r) {
  json status = json::array();
  for (DeliveryStatus s : r.status) status.push_back(to_string(s));
  json sign = json::array();
  for (bool b : r.sign_consistent) sign.push_back(b);
  return {{"status", status},
          {"clearing_sums", r.clearing_sums},
          {"sign_consistent", sign},
          {"any_saturated", r.any_saturated()},
          {"consistent", r.consistent()}};
}

json to_json(const DiagnosticsReport& r) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const MonotonicitySample& s : r.monotonicity_samples) worst = std::max(worst, s.inner_product);
  json feasible = json::array();
  for (bool b : r.strictly_feasible_plant_per_period) feasible.push_back(b);
  json out = {{"samples", r.monotonicity_samples.size()},
              {"skipped_saturated", r.skipped_saturated},
              {"sample_radius", r.sample_radius},
              {"monotone", r.monotone},
              {"max_inner_product", r.monotonicity_samples.empty() ? json(nullptr) : json(worst)},
              {"jacobian_degenerate", r.jacobian_degenerate},
              {"rank", r.rank},
              {"delivery_count", r.delivery_count},
              {"rank_condition", r.rank_condition},
              {"strictly_feasible_plant_per_period", feasible},
              {"saturation", to_json(r.saturation_events)},
              {"strict_uniqueness", r.strict_uniqueness()}};
  out["jacobian_eigen_max"] = r.jacobian_eigen_max ? json(*r.jacobian_eigen_max) : json(nullptr);
  return out;
}

json to_json(const TwoStageCheck& r) {
  json ds = json::array();
  for (const TwoStageDelivery& d : r.deliveries)
    ds.push_back({{"delivery", d.delivery},
                  {"solver_first", d.solver_first},
                  {"solver_second", d.solver_second},
                  {"closed_form_first", d.closed_form_first},
                  {"relative_error", d.relative_error},
                  {"interior", d.interior},
                  {"kink", d.kink},
                  {"harmonic_risk_aversion", harmonic_risk_aversion(d.params.lambdas)},
                  {"cost_covariances", d.params.cost_covariances},
                  {"retail", d.params.retail},
                  {"demand_covariance", d.params.demand_covariance}});
  return {{"equilibrium", to_json(r.equilibrium)}, {"deliveries", ds}, {"max_relative_error", r.max_relative_error}};
}

json to_json(const MeanMaxResult& r) {
  json ds = json::array();
  for (const MeanMaxDelivery& d : r.deliveries)
    ds.push_back({{"price", d.price},
                  {"price_low", d.price_low},
                  {"price_high", d.price_high},
                  {"supply_min", d.supply_min},
                  {"supply_max", d.supply_max},
                  {"demand", d.demand},
                  {"multiplicity", to_string(d.multiplicity)},
                  {"clears", d.clears}});
  return {{"converged", r.converged},
          {"sweeps", r.sweeps},
          {"prices", to_json(r.prices)},
          {"max_spread", r.max_spread},
          {"deliveries", ds},
          {"message", r.message}};
}

json to_json(const BruteForceResult& r) {
  return {{"prices", to_json(r.prices)},
          {"excess", to_json(r.excess)},
          {"residual", r.residual},
          {"bracketed", r.bracketed},
          {"evaluations", r.evaluations}};
}

json to_json(const EquilibriumOptions& o) {
  return {{"tol", o.tol},
          {"kkt_tol", o.kkt_tol},
          {"max_iter", o.max_iter},
          {"method", to_string(o.method)},
          {"player", {{"kkt_tol", o.player.kkt_tol}, {"dual_tol", o.player.dual_tol}, {"activity_tol", o.player.activity_tol}}}};
}

namespace {

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  if (j.is_array()) {
    bool scalar = true;
    for (const json& x : j) scalar = scalar && !x.is_structured();
    if (scalar) {
      out << prefix << ":";
      for (const json& x : j) {
        out << ' ';
        flatten(x, "", out);
      }
      out << '\n';
      return;
    }
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    return;
  }
  if (!prefix.empty()) out << prefix << ": ";
  if (j.is_number_float()) out << std::setprecision(17) << j.get<double>();
  else if (j.is_string()) out << j.get<std::string>();
  else out << j.dump();
  if (!prefix.empty()) out << '\n';
}

}  // namespace

std::string render(const json& report, Format format) {
  if (format == Format::Json) return report.dump(2) + "\n";
  std::ostringstream out;
  flatten(report, "", out);
  return out.str();
}

}  // namespace equiterm
