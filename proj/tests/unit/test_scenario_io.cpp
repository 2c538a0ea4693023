#include <doctest.h>

#include <json.hpp>

#include "corpus.hpp"
#include "equiterm/covariance.hpp"
#include "equiterm/scenario_io.hpp"
#include "equiterm/validation.hpp"

using namespace equiterm;
using equiterm::testing::data_path;
using equiterm::testing::load_data;

TEST_CASE("sha256 of a known message") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(load_scenario(data_path("desk.json")).sha256 == sha256_hex(read_file(data_path("desk.json"))));
}

TEST_CASE("scenario documents round-trip") {
  for (const char* name : {"desk.json", "two_stage.json", "tiny.json"}) {
    CAPTURE(name);
    const Scenario a = load_data(name);
    const nlohmann::json j = to_json(a);
    const Scenario b = parse_scenario(j);
    CHECK(to_json(b) == j);
    CHECK(b.grid.contract_count() == a.grid.contract_count());
    CHECK(b.producers.size() == a.producers.size());
  }
}

TEST_CASE("schema and structure errors") {
  nlohmann::json j = to_json(load_data("desk.json"));
  j["schema"] = "other/9";
  CHECK_THROWS_AS(parse_scenario(j), ScenarioError);
  j = to_json(load_data("desk.json"));
  j.erase("grid");
  CHECK_THROWS_AS(parse_scenario(j), ScenarioError);
  CHECK_THROWS(parse_scenario_text("{not json"));
  CHECK_THROWS_AS(load_scenario(data_path("missing.json")), FileError);
}

namespace {

// Full scenario whose exogenous block carries the ensemble file's paths.
nlohmann::json ensemble_scenario() {
  const nlohmann::json e = nlohmann::json::parse(read_file(data_path("ensemble.json")));
  nlohmann::json j = to_json(load_data("two_stage.json"));
  j["grid"] = e["grid"];
  j["exogenous"] = {{"demand", {5.0}}, {"ensemble", e["ensemble"]}};
  return j;
}

}  // namespace

TEST_CASE("ensemble scenarios default forwards to path means") {
  const Scenario s = parse_scenario(ensemble_scenario());
  CHECK(to_json(parse_scenario(to_json(s))) == to_json(s));
  REQUIRE(s.exogenous.ensemble.has_value());
  const Eigen::VectorXd mean = weighted_mean(*s.exogenous.ensemble, false);
  const std::size_t n = s.grid.contract_count();
  for (std::size_t k = 0; k < n; ++k) {
    CHECK(s.exogenous.fuel_forwards[0][k] == doctest::Approx(mean[static_cast<Eigen::Index>(n + k)]));
    CHECK(s.exogenous.emission_forwards[k] == doctest::Approx(mean[static_cast<Eigen::Index>(2 * n + k)]));
  }
  const LoadedEnsemble e = load_ensemble(data_path("ensemble.json"));
  CHECK(e.ensemble.path_count() == 4);
}

TEST_CASE("validation of capacity shortfall") {
  const ValidationReport r = validate_scenario(load_data("infeasible.json"));
  CHECK_FALSE(r.ok());
  CHECK_FALSE(r.failures().empty());
}

TEST_CASE("validation of the desk market") {
  const ValidationReport r = validate_scenario(load_data("desk.json"));
  CHECK(r.ok());
  CHECK(r.covariance.ok);
  REQUIRE_FALSE(r.player_margins.empty());
  for (double m : r.player_margins) CHECK(m >= 0.1);
  REQUIRE(r.joint_margin.has_value());
  CHECK(*r.joint_margin >= 0.1);
}

TEST_CASE("zero trading bound has no interior") {
  Scenario s = load_data("desk.json");
  s.bounds.v_trade = 0.0;
  CHECK_FALSE(validate_scenario(s).ok());
}

TEST_CASE("random corpus scenarios validate") {
  for (const Scenario& s : equiterm::testing::make_corpus({8, 7})) CHECK(validate_scenario(s).ok());
}
