#include "corpus.hpp"

#include <random>

#include "equiterm/scenario_io.hpp"
#include "equiterm/validation.hpp"

namespace equiterm::testing {

std::string data_path(const std::string& name) { return std::string(EQUITERM_DATA_DIR) + "/" + name; }

Scenario load_data(const std::string& name) { return load_scenario(data_path(name)).scenario; }

namespace {

CovarianceBlocks factor_covariance(std::size_t n, std::size_t fuels, std::mt19937_64& rng) {
  const Eigen::Index d = static_cast<Eigen::Index>(n * (fuels + 2));
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.1, 0.5);
  Eigen::MatrixXd b(d, 3);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < 3; ++k) b(i, k) = 0.8 * z(rng);
  Eigen::MatrixXd c = b * b.transpose();
  for (Eigen::Index i = 0; i < d; ++i) c(i, i) += u(rng);
  return CovarianceBlocks::split(c, n);
}

std::vector<double> flat(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double base = u(rng);
  std::uniform_real_distribution<double> wiggle(-0.3, 0.3);
  std::vector<double> out(n);
  for (double& x : out) x = base + wiggle(rng);
  return out;
}

}  // namespace

std::vector<Scenario> make_corpus(const CorpusSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](std::size_t a, std::size_t b) { return std::uniform_int_distribution<std::size_t>(a, b)(rng); };

  std::vector<Scenario> out;
  std::size_t attempts = 0;
  while (out.size() < spec.count && attempts < 50 * spec.count) {
    ++attempts;
    Scenario s;
    const std::size_t nj = pick(1, spec.max_deliveries);
    std::vector<Delivery> ds;
    std::size_t n = 0;
    for (std::size_t j = 0; j < nj; ++j) {
      const std::size_t ni = spec.exact_trading ? spec.exact_trading : pick(1, spec.max_trading);
      const double t = static_cast<double>(j + 1);
      Delivery d{t, {}};
      for (std::size_t i = 0; i < ni; ++i) d.trading_times.push_back(t - 0.25 * static_cast<double>(ni - 1 - i));
      n += ni;
      ds.push_back(d);
    }
    if (n > spec.max_contracts) continue;
    s.grid = TradingGrid(ds, 0.02);

    const std::size_t nf = pick(1, 2);
    for (std::size_t l = 0; l < nf; ++l) s.fuels.push_back({l == 0 ? "gas" : "coal", uni(0.3, 0.9)});

    double capacity = 0.0;
    const std::size_t np = pick(1, spec.max_producers);
    for (std::size_t p = 0; p < np; ++p) {
      Producer prod{"producer" + std::to_string(p), uni(0.01, 0.2), {}};
      const std::size_t plants = pick(1, 3);
      for (std::size_t r = 0; r < plants; ++r) {
        const double cap = uni(5.0, 20.0);
        const double ramp = pick(0, 1) ? cap : uni(0.5, 1.0) * cap;
        prod.plants.push_back({"plant" + std::to_string(r), s.fuels[pick(0, nf - 1)].name, cap, ramp, -ramp, uni(1.5, 3.0)});
        capacity += cap;
      }
      s.producers.push_back(std::move(prod));
    }

    const std::size_t nc = pick(1, spec.max_consumers);
    std::vector<double> shares(nc);
    double total = 0.0;
    for (double& x : shares) total += (x = uni(0.2, 1.0));
    for (std::size_t c = 0; c < nc; ++c)
      s.consumers.push_back({"consumer" + std::to_string(c), uni(0.01, 0.2), shares[c] / total, uni(30.0, 60.0)});

    for (std::size_t j = 0; j < nj; ++j) s.exogenous.demand.push_back(uni(0.3, 0.7) * capacity);
    for (std::size_t l = 0; l < nf; ++l) s.exogenous.fuel_forwards.push_back(flat(n, 5.0, 10.0, rng));
    s.exogenous.emission_forwards = flat(n, 5.0, 15.0, rng);
    s.exogenous.covariance = factor_covariance(n, nf, rng);
    s.bounds = {1000.0, 10000.0, 1000.0};

    if (validate_scenario(s).ok()) out.push_back(std::move(s));
  }
  return out;
}

Scenario simple_scenario(std::size_t deliveries, std::size_t trading, double demand, double capacity,
                         std::uint64_t seed, double risk_aversion) {
  std::mt19937_64 rng(seed);
  Scenario s;
  std::vector<Delivery> ds;
  for (std::size_t j = 0; j < deliveries; ++j) {
    const double t = static_cast<double>(j + 1);
    Delivery d{t, {}};
    for (std::size_t i = 0; i < trading; ++i) d.trading_times.push_back(t - 0.5 * static_cast<double>(trading - 1 - i));
    ds.push_back(d);
  }
  s.grid = TradingGrid(ds, 0.02);
  const std::size_t n = s.grid.contract_count();
  s.fuels = {{"gas", 0.4}};
  s.producers = {{"gen", risk_aversion, {{"ccgt", "gas", capacity, capacity, -capacity, 2.0}}}};
  s.consumers = {{"retail", risk_aversion, 1.0, 40.0}};
  s.exogenous.demand.assign(deliveries, demand);
  s.exogenous.fuel_forwards = {std::vector<double>(n, 8.0)};
  s.exogenous.emission_forwards.assign(n, 10.0);
  s.exogenous.covariance = factor_covariance(n, 1, rng);
  s.bounds = {1000.0, 10000.0, 1000.0};
  return s;
}

Scenario consumer_scenario(std::size_t trading, double demand, double risk_aversion, double interest_rate) {
  Scenario s;
  Delivery d{1.0, {}};
  for (std::size_t i = 0; i < trading; ++i) d.trading_times.push_back(1.0 - 0.25 * static_cast<double>(trading - 1 - i));
  s.grid = TradingGrid({d}, interest_rate);
  const Eigen::Index n = static_cast<Eigen::Index>(trading);
  s.fuels = {{"gas", 0.4}};
  s.consumers = {{"retail", risk_aversion, 1.0, 40.0}};
  s.exogenous.demand = {demand};
  s.exogenous.fuel_forwards = {std::vector<double>(trading, 8.0)};
  s.exogenous.emission_forwards.assign(trading, 10.0);
  s.exogenous.covariance = CovarianceBlocks{Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Zero(n, 2 * n),
                                            Eigen::MatrixXd::Identity(2 * n, 2 * n)};
  s.bounds = {1000.0, 10000.0, 1000.0};
  return s;
}

}  // namespace equiterm::testing
