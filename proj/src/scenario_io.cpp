#include "equiterm/scenario_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace equiterm {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return ss.str();
}

namespace {

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw ScenarioError(std::string(what) + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& x : j) {
    if (!x.is_number()) throw ScenarioError(std::string(what) + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Eigen::MatrixXd matrix(const json& j, const char* what) {
  if (!j.is_array()) throw ScenarioError(std::string(what) + ": expected an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::vector<double> row = numbers(j[static_cast<std::size_t>(r)], what);
    if (r == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) throw ScenarioError(std::string(what) + ": ragged rows");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

json rows(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

void check_schema(const json& j) {
  if (!j.is_object()) throw ScenarioError("scenario: top level must be an object");
  if (!j.contains("schema") || !j["schema"].is_string() || j["schema"].get<std::string>() != kScenarioSchema)
    throw ScenarioError(std::string("scenario: \"schema\" must be \"") + kScenarioSchema + "\"");
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
}

}  // namespace

TradingGrid parse_grid(const json& j) {
  return guarded([&] {
    std::vector<Delivery> ds;
    for (const json& d : j.at("deliveries")) ds.push_back({d.at("time").get<double>(), numbers(d.at("trading_times"), "trading_times")});
    return TradingGrid(std::move(ds), j.value("interest_rate", 0.0));
  });
}

PathEnsemble<double> parse_ensemble(const json& j, const TradingGrid& grid, std::size_t fuel_count) {
  return guarded([&] {
    std::vector<PricePath<double>> paths;
    for (const json& p : j.at("paths")) {
      PricePath<double> path;
      path.weight = p.at("weight").get<double>();
      path.pi = numbers(p.at("pi"), "pi");
      path.g = numbers(p.at("g"), "g");
      path.g_em = numbers(p.at("g_em"), "g_em");
      if (p.contains("history")) path.history = p["history"].get<std::vector<std::int64_t>>();
      paths.push_back(std::move(path));
    }
    return PathEnsemble<double>(grid, fuel_count, std::move(paths));
  });
}

Scenario parse_scenario(const json& j) {
  check_schema(j);
  return guarded([&] {
    Scenario s;
    s.grid = parse_grid(j.at("grid"));
    const std::size_t n = s.grid.contract_count();
    for (const json& f : j.at("fuels")) s.fuels.push_back({f.at("name").get<std::string>(), f.at("emission_intensity").get<double>()});
    for (const json& p : j.at("producers")) {
      Producer prod{p.at("name").get<std::string>(), p.at("risk_aversion").get<double>(), {}};
      for (const json& q : p.at("plants"))
        prod.plants.push_back({q.at("name").get<std::string>(), q.at("fuel").get<std::string>(), q.at("capacity").get<double>(),
                               q.at("ramp_up").get<double>(), q.at("ramp_down").get<double>(), q.at("efficiency").get<double>()});
      s.producers.push_back(std::move(prod));
    }
    for (const json& c : j.at("consumers"))
      s.consumers.push_back({c.at("name").get<std::string>(), c.at("risk_aversion").get<double>(),
                             c.at("demand_share").get<double>(), c.value("retail_price", 0.0)});

    const json& ex = j.at("exogenous");
    s.exogenous.demand = numbers(ex.at("demand"), "demand");
    if (ex.contains("ensemble")) s.exogenous.ensemble = parse_ensemble(ex["ensemble"], s.grid, s.fuels.size());
    if (ex.contains("covariance")) {
      const json& c = ex["covariance"];
      s.exogenous.covariance = CovarianceBlocks{matrix(c.at("q1"), "q1"), matrix(c.at("q2"), "q2"), matrix(c.at("q3"), "q3")};
    }
    if (!s.exogenous.ensemble && !s.exogenous.covariance)
      throw ScenarioError("scenario: exogenous needs \"covariance\" blocks or an \"ensemble\"");

    // Forward quotes default to the ensemble means.
    std::vector<double> mean_g(n * s.fuels.size(), 0.0), mean_em(n, 0.0);
    if (s.exogenous.ensemble) {
      for (const auto& p : s.exogenous.ensemble->paths()) {
        for (std::size_t k = 0; k < mean_g.size(); ++k) mean_g[k] += p.weight * p.g[k];
        for (std::size_t k = 0; k < n; ++k) mean_em[k] += p.weight * p.g_em[k];
      }
    }
    if (ex.contains("fuel_forwards")) {
      for (const json& row : ex["fuel_forwards"]) s.exogenous.fuel_forwards.push_back(numbers(row, "fuel_forwards"));
    } else if (s.exogenous.ensemble) {
      s.exogenous.fuel_forwards.assign(s.fuels.size(), std::vector<double>(n));
      for (std::size_t node = 0; node < n; ++node)
        for (std::size_t l = 0; l < s.fuels.size(); ++l) s.exogenous.fuel_forwards[l][node] = mean_g[node * s.fuels.size() + l];
    } else {
      throw ScenarioError("scenario: exogenous.fuel_forwards missing");
    }
    if (ex.contains("emission_forwards")) s.exogenous.emission_forwards = numbers(ex["emission_forwards"], "emission_forwards");
    else if (s.exogenous.ensemble) s.exogenous.emission_forwards = mean_em;
    else throw ScenarioError("scenario: exogenous.emission_forwards missing");

    const json& b = j.at("bounds");
    s.bounds = {b.at("v_trade").get<double>(), b.at("f_trade").get<double>(), b.at("pi_max").get<double>()};
    return s;
  });
}

Scenario parse_scenario_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
  return parse_scenario(j);
}

json to_json(const TradingGrid& grid) {
  json ds = json::array();
  for (const Delivery& d : grid.deliveries()) ds.push_back({{"time", d.time}, {"trading_times", d.trading_times}});
  return {{"interest_rate", grid.interest_rate()}, {"deliveries", ds}};
}

json to_json(const PathEnsemble<double>& e) {
  json paths = json::array();
  for (const auto& p : e.paths()) {
    json x = {{"weight", p.weight}, {"pi", p.pi}, {"g", p.g}, {"g_em", p.g_em}};
    if (!p.history.empty()) x["history"] = p.history;
    paths.push_back(x);
  }
  return {{"paths", paths}};
}

json to_json(const Scenario& s) {
  json fuels = json::array(), producers = json::array(), consumers = json::array();
  for (const Fuel& f : s.fuels) fuels.push_back({{"name", f.name}, {"emission_intensity", f.emission_intensity}});
  for (const Producer& p : s.producers) {
    json plants = json::array();
    for (const PowerPlant& q : p.plants)
      plants.push_back({{"name", q.name}, {"fuel", q.fuel}, {"capacity", q.capacity}, {"ramp_up", q.ramp_up},
                        {"ramp_down", q.ramp_down}, {"efficiency", q.efficiency}});
    producers.push_back({{"name", p.name}, {"risk_aversion", p.risk_aversion}, {"plants", plants}});
  }
  for (const Consumer& c : s.consumers)
    consumers.push_back({{"name", c.name}, {"risk_aversion", c.risk_aversion}, {"demand_share", c.demand_share},
                         {"retail_price", c.retail_price}});
  json ex = {{"demand", s.exogenous.demand},
             {"fuel_forwards", s.exogenous.fuel_forwards},
             {"emission_forwards", s.exogenous.emission_forwards}};
  if (s.exogenous.covariance) {
    const CovarianceBlocks& c = *s.exogenous.covariance;
    ex["covariance"] = {{"q1", rows(c.q1)}, {"q2", rows(c.q2)}, {"q3", rows(c.q3)}};
  }
  if (s.exogenous.ensemble) ex["ensemble"] = to_json(*s.exogenous.ensemble);
  return {{"schema", kScenarioSchema},
          {"grid", to_json(s.grid)},
          {"fuels", fuels},
          {"producers", producers},
          {"consumers", consumers},
          {"exogenous", ex},
          {"bounds", {{"v_trade", s.bounds.v_trade}, {"f_trade", s.bounds.f_trade}, {"pi_max", s.bounds.pi_max}}}};
}

LoadedScenario load_scenario(const std::string& path) {
  const std::string bytes = read_file(path);
  return {parse_scenario_text(bytes), sha256_hex(bytes)};
}

LoadedEnsemble load_ensemble(const std::string& path) {
  const std::string bytes = read_file(path);
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("ensemble: ") + e.what());
  }
  check_schema(j);
  return guarded([&] {
    const TradingGrid grid = parse_grid(j.at("grid"));
    const std::size_t fuels = j.contains("fuels") ? j["fuels"].size() : j.at("fuel_count").get<std::size_t>();
    const json& e = j.contains("ensemble") ? j["ensemble"] : j.at("exogenous").at("ensemble");
    return LoadedEnsemble{parse_ensemble(e, grid, fuels), sha256_hex(bytes)};
  });
}

}  // namespace equiterm
