#include <doctest.h>

#include "corpus.hpp"
#include "equiterm/equilibrium.hpp"
#include "equiterm/oracles.hpp"

using namespace equiterm;
using equiterm::testing::simple_scenario;

namespace {

Scenario undiscounted(std::size_t deliveries, std::size_t trading, double demand, double capacity) {
  Scenario s = simple_scenario(deliveries, trading, demand, capacity);
  s.grid = TradingGrid(s.grid.deliveries(), 0.0);
  return s;
}

}  // namespace

TEST_CASE("two-stage closed form") {
  TwoStageParams p;
  p.expected_t2_price = 42.0;
  p.lambdas = {2.0, 2.0};
  p.cost_covariances = {0.0};
  CHECK(two_stage_price(p) == 42.0);
  p.cost_covariances = {0.3};
  CHECK(two_stage_price(p) == doctest::Approx(42.3));
  p.demand_covariance = 0.1;
  p.retail = 2.0;
  CHECK(two_stage_price(p) == doctest::Approx(42.1));
  CHECK(harmonic_risk_aversion({2.0, 2.0}) == doctest::Approx(1.0));
  CHECK(harmonic_risk_aversion({1.0, 0.5, 0.25}) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("risk-neutral price is the marginal cost inside capacity") {
  const MeanMaxResult r = mean_max_equilibrium(undiscounted(2, 2, 5.0, 10.0));
  REQUIRE(r.converged);
  for (const MeanMaxDelivery& d : r.deliveries) {
    CHECK(d.price == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(d.clears);
    CHECK(d.multiplicity != Multiplicity::Price);
    CHECK(d.supply_min <= 5.0 + 1e-7);
    CHECK(d.supply_max >= 5.0 - 1e-7);
  }
  CHECK(r.max_spread <= 1e-9);
  for (Eigen::Index k = 0; k < r.prices.size(); ++k) CHECK(r.prices[k] == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("demand at capacity gives a price interval") {
  const MeanMaxResult r = mean_max_equilibrium(undiscounted(1, 2, 10.0, 10.0));
  REQUIRE(r.converged);
  REQUIRE(r.deliveries.size() == 1);
  const MeanMaxDelivery& d = r.deliveries[0];
  CHECK(d.multiplicity == Multiplicity::Price);
  CHECK(d.price_low == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(d.price_high > d.price_low + 1.0);
  CHECK(r.max_spread <= 1e-9);
}

TEST_CASE("data files classify their supply segments") {
  const MeanMaxResult h = mean_max_equilibrium(equiterm::testing::load_data("meanmax_horizontal.json"));
  const MeanMaxResult v = mean_max_equilibrium(equiterm::testing::load_data("meanmax_vertical.json"));
  REQUIRE(h.converged);
  REQUIRE(v.converged);
  for (const MeanMaxDelivery& d : h.deliveries) CHECK(d.multiplicity == Multiplicity::Volume);
  for (const MeanMaxDelivery& d : v.deliveries) CHECK(d.multiplicity == Multiplicity::Price);
}

TEST_CASE("lattice oracle refuses large markets") {
  const Market m = Market::assemble(simple_scenario(2, 2, 5.0, 10.0));
  CHECK_THROWS_AS(brute_force_equilibrium(m), std::invalid_argument);
}

TEST_CASE("lattice oracle on one contract") {
  Scenario s = simple_scenario(1, 1, 5.0, 10.0);
  s.consumers = {{"a", 0.1, 0.5, 40.0}, {"b", 0.1, 0.5, 40.0}};
  const Market m = Market::assemble(s);
  const BruteForceResult b = brute_force_equilibrium(m);
  REQUIRE(b.solutions.size() == 3);
  CHECK(b.solutions[1].primal[0] == b.solutions[2].primal[0]);
  const EquilibriumResult r = solve_equilibrium(m);
  CHECK(std::abs(r.prices[0] - b.prices[0]) <= 1e-4);
  const double lattice = (b.prices[0] + m.scenario.bounds.pi_max) / 1e-4;
  CHECK(std::abs(lattice - std::round(lattice)) <= 1e-6);

  Scenario more = s;
  more.exogenous.demand = {8.0};
  const BruteForceResult b2 = brute_force_equilibrium(Market::assemble(more));
  CHECK(b2.prices[0] > b.prices[0]);
}

TEST_CASE("multiplicity names") {
  CHECK(std::string(to_string(Multiplicity::None)) == "none");
  CHECK(std::string(to_string(Multiplicity::Price)) != std::string(to_string(Multiplicity::Volume)));
}
