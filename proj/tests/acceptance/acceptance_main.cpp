#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "corpus.hpp"
#include "equiterm/equilibrium.hpp"
#include "equiterm/oracles.hpp"
#include "equiterm/price_process.hpp"
#include "equiterm/validation.hpp"

using namespace equiterm;
using namespace equiterm::testing;
using Rational = boost::multiprecision::cpp_rational;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Run {
  Scenario scenario;
  Market market;
  EquilibriumResult eq;
  double seconds = 0.0;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

EquilibriumResult timed_solve(const Market& m, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  EquilibriumResult r = solve_equilibrium(m);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<Run> solve_corpus() {
  std::vector<Run> runs;
  for (Scenario& s : make_corpus({})) {
    Run r{s, Market::assemble(s), {}, 0.0};
    r.eq = timed_solve(r.market, r.seconds);
    runs.push_back(std::move(r));
  }
  return runs;
}

Outcome market_clearing(const std::vector<Run>& runs) {
  Outcome o;
  double worst_z = 0.0, worst_kkt = 0.0, worst_t = 0.0;
  std::size_t bad = 0;
  for (const Run& r : runs) {
    double kkt = 0.0;
    for (const PlayerSolution& s : r.eq.player_solutions) kkt = std::max(kkt, s.kkt_residual);
    worst_z = std::max(worst_z, r.eq.clearing_residual);
    worst_kkt = std::max(worst_kkt, kkt);
    worst_t = std::max(worst_t, r.seconds);
    if (!r.eq.converged() || r.eq.clearing_residual > 1e-8 || kkt > 1e-8 || r.seconds > 5.0) ++bad;
  }
  o.pass = runs.size() >= 20 && bad == 0;
  o.detail = std::to_string(runs.size()) + " scenarios, " + std::to_string(bad) + " failing; max |Z| " + fmt(worst_z) +
             ", max KKT " + fmt(worst_kkt) + ", slowest " + fmt(worst_t) + " s";
  return o;
}

Outcome oracle_equivalence(const std::vector<Run>& runs) {
  std::vector<Scenario> cases;
  for (const Run& r : runs)
    if (r.scenario.grid.contract_count() <= 2) cases.push_back(r.scenario);
  cases.push_back(simple_scenario(1, 1, 5.0, 10.0, 3));
  cases.push_back(simple_scenario(2, 1, 5.0, 10.0, 4));
  cases.push_back(simple_scenario(1, 2, 5.0, 10.0, 5));
  cases.push_back(simple_scenario(2, 1, 7.0, 12.0, 6, 0.05));
  cases.push_back(load_data("tiny.json"));
  CorpusSpec small;
  small.count = 6;
  small.seed = 77;
  small.max_contracts = 2;
  small.max_deliveries = 2;
  small.max_trading = 2;
  for (Scenario& s : make_corpus(small)) cases.push_back(std::move(s));

  Outcome o;
  double worst = 0.0;
  std::size_t bad = 0;
  for (const Scenario& s : cases) {
    const Market m = Market::assemble(s);
    const EquilibriumResult eq = solve_equilibrium(m);
    const BruteForceResult bf = brute_force_equilibrium(m);
    const double d = (eq.prices - bf.prices).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, d);
    if (!eq.converged() || d > 1e-4) ++bad;
  }
  o.pass = bad == 0;
  o.detail = std::to_string(cases.size()) + " instances with N <= 2, max |solver - lattice| " + fmt(worst);
  return o;
}

Outcome two_stage(void) {
  CorpusSpec spec;
  spec.count = 10;
  spec.seed = 4242;
  spec.exact_trading = 2;
  spec.max_contracts = 8;
  Outcome o;
  std::size_t interior = 0, excluded = 0, bad = 0;
  double worst = 0.0;
  std::vector<Scenario> cases = make_corpus(spec);
  cases.push_back(load_data("two_stage.json"));
  for (const Scenario& s : cases) {
    const TwoStageCheck c = two_stage_cross_check(Market::assemble(s));
    bool usable = c.equilibrium.converged() && !c.deliveries.empty();
    for (const TwoStageDelivery& d : c.deliveries) usable = usable && d.interior && !d.kink;
    if (!usable) {
      ++excluded;
      continue;
    }
    ++interior;
    worst = std::max(worst, c.max_relative_error);
    if (c.max_relative_error > 1e-6) ++bad;
  }
  o.pass = interior >= 5 && bad == 0;
  o.detail = std::to_string(interior) + " interior instances (" + std::to_string(excluded) +
             " excluded as non-interior), max relative error " + fmt(worst);
  return o;
}

Outcome monotonicity(const std::vector<Run>& runs) {
  Outcome o;
  std::size_t bad = 0, total = 0;
  double worst = -1e300;
  for (const Run& r : runs) {
    const DiagnosticsReport d = check_uniqueness(r.market, r.eq.prices, {});
    total += d.monotonicity_samples.size();
    for (const auto& s : d.monotonicity_samples) worst = std::max(worst, s.inner_product);
    if (!d.monotone || d.monotonicity_samples.size() < 1000) ++bad;
  }
  o.pass = bad == 0;
  o.detail = std::to_string(total) + " pairs over " + std::to_string(runs.size()) + " scenarios, " + std::to_string(bad) +
             " scenarios failing, largest inner product " + fmt(worst);
  return o;
}

Outcome jacobians(const std::vector<Run>& runs) {
  Outcome o;
  const double h = 1e-6;
  double worst_fd = 0.0, worst_eig = -1e300;
  std::size_t short_scenarios = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const Run& r = runs[k];
    const Eigen::Index n = static_cast<Eigen::Index>(r.market.contracts());
    ExcessVolumeMap map(r.market);
    std::mt19937_64 rng(1000 + k);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double radius = 0.2 * (1.0 + r.eq.prices.cwiseAbs().maxCoeff());
    std::size_t points = 0, tries = 0;
    while (points < 50 && tries < 5000) {
      ++tries;
      if (tries % 50 == 0) radius *= 0.5;
      Eigen::VectorXd x(n);
      for (Eigen::Index i = 0; i < n; ++i) x[i] = r.eq.prices[i] + radius * u(rng);
      const ExcessVolumeMap::Evaluation at = map.evaluate(x);
      if (detect_saturation(r.market, at.solutions).any_saturated()) continue;
      std::vector<ResponseJacobian> jac;
      bool boundary = false;
      for (std::size_t p = 0; p < at.solutions.size(); ++p) {
        jac.push_back(response_jacobian(r.market.players[p], at.solutions[p]));
        boundary = boundary || jac.back().on_boundary;
      }
      if (boundary) continue;
      std::vector<Eigen::MatrixXd> fd(at.solutions.size(), Eigen::MatrixXd(n, n));
      bool same_selection = true;
      for (Eigen::Index c = 0; c < n && same_selection; ++c) {
        Eigen::VectorXd xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const ExcessVolumeMap::Evaluation ep = map.evaluate(xp);
        const ExcessVolumeMap::Evaluation em = map.evaluate(xm);
        for (std::size_t p = 0; p < at.solutions.size(); ++p) {
          same_selection = same_selection && ep.solutions[p].active_set == at.solutions[p].active_set &&
                           em.solutions[p].active_set == at.solutions[p].active_set;
          fd[p].col(c) = (ep.solutions[p].primal.head(n) - em.solutions[p].primal.head(n)) / (2.0 * h);
        }
      }
      if (!same_selection) continue;
      ++points;
      for (std::size_t p = 0; p < jac.size(); ++p) {
        worst_fd = std::max(worst_fd, (fd[p] - jac[p].matrix).cwiseAbs().maxCoeff());
        const Eigen::MatrixXd sym = 0.5 * (jac[p].matrix + jac[p].matrix.transpose());
        worst_eig = std::max(worst_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().maxCoeff());
      }
    }
    if (points < 50) ++short_scenarios;
  }
  o.pass = short_scenarios == 0 && worst_fd <= 1e-5 && worst_eig <= 1e-9;
  o.detail = "50 interior points x " + std::to_string(runs.size()) + " scenarios (" + std::to_string(short_scenarios) +
             " short), max |J - FD| " + fmt(worst_fd) + ", max eigenvalue " + fmt(worst_eig);
  return o;
}

Outcome consumer_projection(const std::vector<Run>& runs) {
  Outcome o;
  double worst_formula = 0.0, worst_range = 0.0, worst_off = -1e300;
  std::size_t consumers = 0, off_samples = 0;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 1.0);
  for (const Run& r : runs) {
    if (!r.eq.converged()) continue;
    const Eigen::MatrixXd& a1 = r.market.a1;
    const Eigen::Index n = a1.cols();
    for (std::size_t p = r.market.producer_count(); p < r.market.players.size(); ++p) {
      const PlayerProblem& c = r.market.players[p];
      const Eigen::MatrixXd j = response_jacobian(c, r.eq.player_solutions[p]).matrix;
      const Eigen::MatrixXd hi = c.quadratic.inverse();
      const Eigen::MatrixXd analytic = -(hi - hi * a1.transpose() * (a1 * hi * a1.transpose()).inverse() * a1 * hi);
      worst_formula = std::max(worst_formula, (analytic - j).cwiseAbs().maxCoeff() / (1.0 + analytic.cwiseAbs().maxCoeff()));
      for (int s = 0; s < 20; ++s) {
        Eigen::VectorXd e(a1.rows());
        for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = z(rng);
        const Eigen::VectorXd x = a1.transpose() * e;
        worst_range = std::max(worst_range, std::abs(x.dot(j * x)) / (x.squaredNorm() * (1.0 + j.norm())));
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = z(rng);
        y -= a1.transpose() * (a1 * a1.transpose()).ldlt().solve(a1 * y);
        if (y.norm() < 1e-8) continue;  // every delivery has a single trading time
        worst_off = std::max(worst_off, y.dot(j * y) / y.squaredNorm());
        ++off_samples;
      }
      ++consumers;
    }
  }
  o.pass = consumers > 0 && off_samples > 0 && worst_formula <= 1e-8 && worst_range <= 1e-12 && worst_off < 0.0;
  o.detail = std::to_string(consumers) + " consumers: formula deviation " + fmt(worst_formula) +
             ", |x'Jx| on range " + fmt(worst_range) + ", max x'Jx/|x|^2 over " + std::to_string(off_samples) + " samples off range " + fmt(worst_off);
  return o;
}

Outcome rank_condition() {
  Outcome o;
  std::size_t bad = 0;
  for (std::size_t nj = 1; nj <= 4; ++nj) {
    const Scenario s = simple_scenario(nj, 2, 5.0, 10.0, 10 + nj);
    const Market m = Market::assemble(s);
    const EquilibriumResult eq = solve_equilibrium(m);
    UniquenessOptions uo;
    uo.samples = 20;
    const DiagnosticsReport d = check_uniqueness(m, eq.prices, uo);
    bool interior = true;
    for (bool b : d.strictly_feasible_plant_per_period) interior = interior && b;
    if (!eq.converged() || !interior || d.rank != nj || !d.rank_condition) ++bad;

    Scenario bare = s;
    bare.producers.clear();
    const Market mb = Market::assemble(bare);
    const DiagnosticsReport db = check_uniqueness(mb, eq.prices, uo);
    if (db.rank_condition || db.strict_uniqueness()) ++bad;
  }
  o.pass = bad == 0;
  o.detail = "J = 1..4 with an interior plant report rank J; producer-free copies report failure; " + std::to_string(bad) +
             " mismatches";
  return o;
}

template <class Scalar>
PathEnsemble<Scalar> random_tree(std::mt19937_64& rng, std::function<Scalar(int, int)> value,
                                 std::function<std::vector<Scalar>(std::size_t)> weights, double interest = 0.0) {
  // One delivery traded at three dates; branching factor 2 or 3 per step.
  TradingGrid grid({{1.0, {0.0, 0.5, 1.0}}}, interest);
  std::uniform_int_distribution<int> branch(2, 3), v(-20, 20);
  const int b1 = branch(rng);
  std::vector<PricePath<Scalar>> paths;
  std::vector<Scalar> w1 = weights(static_cast<std::size_t>(b1));
  const Scalar root_pi = value(v(rng), 4), root_g = value(v(rng), 4), root_e = value(v(rng), 4);
  for (int a = 0; a < b1; ++a) {
    const Scalar pi1 = value(v(rng), 3), g1 = value(v(rng), 3), e1 = value(v(rng), 3);
    const int b2 = branch(rng);
    std::vector<Scalar> w2 = weights(static_cast<std::size_t>(b2));
    for (int b = 0; b < b2; ++b) {
      PricePath<Scalar> p;
      p.weight = w1[static_cast<std::size_t>(a)] * w2[static_cast<std::size_t>(b)];
      p.pi = {root_pi, pi1, value(v(rng), 7)};
      p.g = {root_g, g1, value(v(rng), 5)};
      p.g_em = {root_e, e1, value(v(rng), 2)};
      p.history = {0, a, a * 10 + b};
      paths.push_back(p);
    }
  }
  return PathEnsemble<Scalar>(grid, 1, paths);
}

Outcome doob_suite() {
  Outcome o;
  std::mt19937_64 rng(8);
  auto rational = [](int num, int den) { return Rational(num, den); };
  auto rational_weights = [&](std::size_t k) {
    std::uniform_int_distribution<int> u(1, 9);
    std::vector<Rational> w(k);
    Rational total = 0;
    for (Rational& x : w) total += (x = u(rng));
    for (Rational& x : w) x /= total;
    return w;
  };
  std::size_t exact_failures = 0;
  for (int t = 0; t < 50; ++t) {
    const PathEnsemble<Rational> e = random_tree<Rational>(rng, rational, rational_weights);
    const DoobCheck<Rational> c = check_doob(e, doob_decompose(e));
    if (c.reconstruction != 0 || c.martingale != 0 || c.predictability != 0) ++exact_failures;
  }

  auto real = [](int num, int den) { return static_cast<double>(num) / den; };
  auto real_weights = [&](std::size_t k) {
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::vector<double> w(k);
    double total = 0.0;
    for (double& x : w) total += (x = u(rng));
    for (double& x : w) x /= total;
    return w;
  };
  double worst = 0.0;
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int t = 0; t < 100; ++t) {
    const PathEnsemble<double> base = random_tree<double>(rng, real, real_weights);
    // Start from a process whose drift is deterministic: its martingale part plus a drift curve.
    const PathEnsemble<double> original = shift_measure(base, DriftTable<double>::deterministic({0.0, d(rng), d(rng)}, base.path_count()));
    const PathEnsemble<double> shifted =
        shift_measure(original, DriftTable<double>::deterministic({0.0, d(rng), d(rng)}, original.path_count()));
    const InvarianceReport<double> rep = verify_covariance_invariance(original, shifted);
    worst = std::max({worst, rep.max_abs_deviation, rep.max_abs_deviation_vs_martingale});
  }
  o.pass = exact_failures == 0 && worst <= 1e-12;
  o.detail = "50 rational trees exact (" + std::to_string(exact_failures) + " failures); 100 drifts, max covariance deviation " +
             fmt(worst);
  return o;
}

Outcome mean_max(const std::vector<Run>& runs) {
  Outcome o;
  double worst = 0.0;
  std::size_t converged = 0;
  for (const Run& r : runs) {
    const MeanMaxResult m = mean_max_equilibrium(r.scenario);
    if (!m.converged) continue;
    ++converged;
    worst = std::max(worst, m.max_spread);
  }
  const MeanMaxResult h = mean_max_equilibrium(load_data("meanmax_horizontal.json"));
  const MeanMaxResult v = mean_max_equilibrium(load_data("meanmax_vertical.json"));
  const bool hz = h.converged && h.max_spread <= 1e-9 && h.deliveries[0].multiplicity == Multiplicity::Volume;
  const bool vt = v.converged && v.max_spread <= 1e-9 && v.deliveries[0].multiplicity == Multiplicity::Price;
  o.pass = converged > 0 && worst <= 1e-9 && hz && vt;
  o.detail = std::to_string(converged) + "/" + std::to_string(runs.size()) + " convergent runs, max spread " + fmt(worst) +
             "; horizontal instance " + to_string(h.deliveries[0].multiplicity) + ", vertical instance " +
             to_string(v.deliveries[0].multiplicity);
  return o;
}

Outcome saturation(const std::vector<Run>& runs) {
  Outcome o;
  std::size_t bad = 0;
  for (const Run& r : runs) {
    const double edge = r.scenario.bounds.pi_max - 1.0;
    const Eigen::Index n = static_cast<Eigen::Index>(r.market.contracts());
    for (int sign : {1, -1}) {
      const SaturationReport s = detect_saturation(r.market, Eigen::VectorXd::Constant(n, sign * edge));
      const DeliveryStatus want = sign > 0 ? DeliveryStatus::AllUpper : DeliveryStatus::AllLower;
      for (std::size_t j = 0; j < s.status.size(); ++j) {
        const bool sign_ok = sign > 0 ? s.clearing_sums[j] < 0.0 : s.clearing_sums[j] > 0.0;
        if (s.status[j] != want || !sign_ok || !s.sign_consistent[j]) ++bad;
      }
    }
  }
  o.pass = bad == 0;
  o.detail = std::to_string(runs.size()) + " scenarios at +-(Pi_max - 1): " + std::to_string(bad) + " deliveries misflagged";
  return o;
}

Outcome bound_hygiene(const std::vector<Run>& runs) {
  Outcome o;
  std::size_t checked = 0, bad = 0;
  double v_ratio = 0.0, f_ratio = 0.0, p_ratio = 0.0;
  for (const Run& r : runs) {
    if (!r.eq.converged()) continue;
    ++checked;
    const Bounds& b = r.scenario.bounds;
    const Eigen::Index n = static_cast<Eigen::Index>(r.market.contracts());
    p_ratio = std::max(p_ratio, r.eq.prices.cwiseAbs().maxCoeff() / b.pi_max);
    for (std::size_t p = 0; p < r.eq.player_solutions.size(); ++p) {
      const Eigen::VectorXd& v = r.eq.player_solutions[p].primal;
      v_ratio = std::max(v_ratio, v.head(n).cwiseAbs().maxCoeff() / b.v_trade);
      if (r.market.players[p].kind == PlayerKind::Producer) {
        const Eigen::Index fo = static_cast<Eigen::Index>(r.market.players[p].index_map.production_begin()) - n;
        f_ratio = std::max(f_ratio, v.segment(n, fo).cwiseAbs().maxCoeff() / b.f_trade);
      }
    }
  }
  const double touch = 1.0 - 1e-9;
  if (v_ratio >= touch || f_ratio >= touch || p_ratio >= touch) ++bad;
  o.pass = checked > 0 && bad == 0;
  o.detail = std::to_string(checked) + " convergent runs; max |V|/V_trade " + fmt(v_ratio) + ", max |F,O|/F_trade " +
             fmt(f_ratio) + ", max |price|/Pi_max " + fmt(p_ratio);
  return o;
}

}  // namespace

int main() {
  const std::vector<Run> runs = solve_corpus();
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"market clearing", [&] { return market_clearing(runs); }},
      {"oracle equivalence", [&] { return oracle_equivalence(runs); }},
      {"two-stage closed form", [&] { return two_stage(); }},
      {"monotonicity", [&] { return monotonicity(runs); }},
      {"jacobian correctness", [&] { return jacobians(runs); }},
      {"consumer projection identity", [&] { return consumer_projection(runs); }},
      {"rank condition", [&] { return rank_condition(); }},
      {"doob suite", [&] { return doob_suite(); }},
      {"mean-max flatness", [&] { return mean_max(runs); }},
      {"saturation logic", [&] { return saturation(runs); }},
      {"bound hygiene", [&] { return bound_hygiene(runs); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
