#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "equiterm/covariance.hpp"
#include "equiterm/equilibrium.hpp"
#include "equiterm/kernels.hpp"
#include "equiterm/oracles.hpp"
#include "equiterm/player.hpp"
#include "equiterm/report.hpp"
#include "equiterm/scenario_io.hpp"
#include "equiterm/validation.hpp"

using namespace equiterm;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInvalid = 2, kNoConvergence = 3 };

struct RunConfig {
  std::string subcommand;
  std::string scenario_path;
  double tol = 1e-8;
  double kkt_tol = 1e-8;
  int max_iter = 200;
  std::string method = "hybrid";
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  double grid_step = 1e-4;
  bool trace = false;
  std::string output_path;
  std::string format = "json";
};

json config_json(const RunConfig& c, const EquilibriumOptions& eo) {
  json out = {{"subcommand", c.subcommand},
              {"format", c.format},
              {"seed", c.seed},
              {"equilibrium", to_json(eo)},
              {"kernels", std::string(kernels::isa_name(kernels::active().isa))}};
  if (c.subcommand == "diagnose") out["samples"] = c.samples;
  if (c.subcommand == "oracle") out["grid_step"] = c.grid_step;
  if (c.subcommand == "validate" || c.subcommand == "solve" || c.subcommand == "diagnose") {
    const ValidationOptions vo;
    out["validation"] = {{"feas_margin", vo.feas_margin}, {"margin_cap", vo.margin_cap}};
  }
  if (c.subcommand == "mean-max") {
    const MeanMaxOptions mo;
    out["mean_max"] = {{"price_tol", mo.price_tol},
                       {"side_offset", mo.side_offset},
                       {"interval_tol", mo.interval_tol},
                       {"volume_tol", mo.volume_tol},
                       {"max_sweeps", mo.max_sweeps}};
  }
  if (c.subcommand == "validate" || c.subcommand == "solve") {
    out["covariance"] = {{"ridge_target", kRidgeTarget}, {"ridge_limit", kRidgeLimit}, {"relative_rank_floor", kRelativeRankFloor}};
  }
  return out;
}

int emit(const RunConfig& c, const json& report) {
  const std::string text = render(report, c.format == "text" ? Format::Text : Format::Json);
  if (c.output_path.empty()) {
    std::cout << text;
    return kOk;
  }
  std::ofstream out(c.output_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << c.output_path << "\n";
    return kUsage;
  }
  out << text;
  return kOk;
}

int fail_validation(const ValidationReport& v) {
  for (const ValidationCheck* f : v.failures()) std::cerr << "validation: " << f->name << ": " << f->message << "\n";
  return kInvalid;
}

int run(const RunConfig& c) {
  EquilibriumOptions eo;
  eo.tol = c.tol;
  eo.kkt_tol = c.kkt_tol;
  eo.max_iter = c.max_iter;
  eo.method = *parse_method(c.method);
  eo.player.kkt_tol = std::min(eo.player.kkt_tol, c.kkt_tol);

  json report = {{"tool", "equiterm"}, {"config", config_json(c, eo)}};

  if (c.subcommand == "doob") {
    const LoadedEnsemble e = load_ensemble(c.scenario_path);
    const DoobParts<double> parts = doob_decompose(e.ensemble);
    const DoobCheck<double> check = check_doob(e.ensemble, parts);
    report["input"] = {{"path", c.scenario_path}, {"sha256", e.sha256}};
    report["result"] = {{"paths", e.ensemble.path_count()},
                        {"martingale", parts.martingale},
                        {"predictable", parts.predictable},
                        {"reconstruction_residual", check.reconstruction},
                        {"martingale_residual", check.martingale},
                        {"predictability_residual", check.predictability}};
    return emit(c, report);
  }

  const LoadedScenario loaded = load_scenario(c.scenario_path);
  const Scenario& s = loaded.scenario;
  report["input"] = {{"path", c.scenario_path}, {"sha256", loaded.sha256}};

  if (c.subcommand == "validate" || c.subcommand == "solve" || c.subcommand == "diagnose") {
    const ValidationReport v = validate_scenario(s);
    report["validation"] = to_json(v);
    if (!v.ok()) {
      const int rc = emit(c, report);
      return rc == kOk ? fail_validation(v) : rc;
    }
    if (c.subcommand == "validate") return emit(c, report);
  }

  if (c.subcommand == "mean-max") {
    const MeanMaxResult r = mean_max_equilibrium(s);
    report["result"] = to_json(r);
    const int rc = emit(c, report);
    if (rc != kOk) return rc;
    if (!r.converged) std::cerr << "mean-max: " << r.message << "\n";
    return r.converged ? kOk : kNoConvergence;
  }

  const Market market = Market::assemble(s);

  if (c.subcommand == "two-stage") {
    const TwoStageCheck r = two_stage_cross_check(market, eo);
    report["result"] = to_json(r);
    const int rc = emit(c, report);
    if (rc != kOk) return rc;
    if (r.deliveries.empty()) std::cerr << "two-stage: no delivery has exactly two trading times\n";
    return r.equilibrium.converged() ? kOk : kNoConvergence;
  }

  if (c.subcommand == "oracle") {
    GridSpec spec;
    spec.step = c.grid_step;
    const BruteForceResult r = brute_force_equilibrium(market, spec);
    report["result"] = to_json(r);
    return emit(c, report);
  }

  const EquilibriumResult eq = solve_equilibrium(market, eo);
  report["result"] = to_json(eq, c.trace);
  if (c.subcommand == "solve") {
    report["saturation"] = to_json(detect_saturation(market, eq.player_solutions, eo.player));
  } else {
    UniquenessOptions uo;
    uo.samples = c.samples;
    uo.seed = c.seed;
    uo.player = eo.player;
    report["diagnostics"] = to_json(check_uniqueness(market, eq.prices, uo));
  }
  const int rc = emit(c, report);
  if (rc != kOk) return rc;
  if (!eq.converged()) {
    std::cerr << "equilibrium: " << to_string(eq.status) << " after " << eq.iterations
              << " iterations, clearing residual " << eq.clearing_residual << "\n";
    return kNoConvergence;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward-price term structure equilibrium solver"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig c;

  app.add_option("--scenario", c.scenario_path, "Scenario JSON file (ensemble file for doob)");
  app.add_option("--tol", c.tol, "Clearing tolerance (max-norm)")->check(CLI::PositiveNumber);
  app.add_option("--kkt-tol", c.kkt_tol, "Player KKT tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", c.max_iter, "Equilibrium iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--method", c.method, "Price update")->check(CLI::IsMember({"tatonnement", "newton", "hybrid"}));
  app.add_option("--seed", c.seed, "Seed for sampled diagnostics");
  app.add_option("--output", c.output_path, "Report file (default stdout)");
  app.add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "text"}));

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"validate", "Check scenario structure and feasibility"},
      {"solve", "Compute the equilibrium term structure"},
      {"diagnose", "Solve, then sample monotonicity and the rank condition"},
      {"two-stage", "Compare two-trading-time deliveries against the closed form"},
      {"mean-max", "Risk-neutral equilibrium with multiplicity classification"},
      {"oracle", "Brute-force lattice equilibrium for N <= 3"},
      {"doob", "Doob decomposition of an ensemble's prices"}};
  for (const auto& [name, help] : subs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->callback([&c, n = name] { c.subcommand = n; });
    if (name == "diagnose") sub->add_option("--samples", c.samples, "Monotonicity pairs")->check(CLI::PositiveNumber);
    if (name == "oracle") sub->add_option("--grid-step", c.grid_step, "Lattice spacing")->check(CLI::PositiveNumber);
    if (name == "solve") sub->add_flag("--trace", c.trace, "Include the iteration trace");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (c.scenario_path.empty()) {
    std::cerr << "error: --scenario is required\n";
    return kUsage;
  }

  try {
    return run(c);
  } catch (const FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const SolveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoConvergence;
  }
}
