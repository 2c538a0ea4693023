#include <algorithm>
#include <numeric>
#include <tuple>

#include "equiterm/assembly.hpp"
#include "equiterm/covariance.hpp"

namespace equiterm {

Eigen::VectorXd PlayerProblem::linear_at(const Eigen::VectorXd& prices) const {
  Eigen::VectorXd c = linear;
  c.head(static_cast<Eigen::Index>(contracts())) = prices;
  return c;
}

std::vector<std::size_t> canonical_plant_order(const Producer& producer, const Scenario& scenario) {
  std::vector<std::size_t> order(producer.plants.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t k) {
    const PowerPlant& p = producer.plants[k];
    return std::make_tuple(scenario.fuel_index(p.fuel), p.name, p.capacity, p.ramp_up, p.ramp_down, p.efficiency);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return order;
}

IndexMap canonical_index(const TradingGrid& grid, const Producer& producer, const Scenario& scenario) {
  std::vector<std::size_t> per_fuel(scenario.fuels.size(), 0);
  for (const PowerPlant& p : producer.plants) ++per_fuel[scenario.fuel_index(p.fuel)];
  return IndexMap(grid, std::move(per_fuel));
}

IndexMap canonical_index(const TradingGrid& grid) { return IndexMap(grid); }

Eigen::MatrixXd delivery_sum_matrix(const TradingGrid& grid) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.delivery_count()),
                                            static_cast<Eigen::Index>(grid.contract_count()));
  for (std::size_t node = 0; node < grid.contract_count(); ++node)
    a(static_cast<Eigen::Index>(grid.delivery_of(node)), static_cast<Eigen::Index>(node)) = 1.0;
  return a;
}

namespace {

void check_dimensions(const Scenario& s, const Eigen::MatrixXd& covariance) {
  const std::size_t n = s.grid.contract_count();
  const std::size_t dim = n * (s.fuels.size() + 2);
  if (static_cast<std::size_t>(covariance.rows()) != dim || static_cast<std::size_t>(covariance.cols()) != dim)
    throw ModelError("assembly: covariance dimension does not match the grid");
  if (s.exogenous.demand.size() != s.grid.delivery_count())
    throw ModelError("assembly: demand needs one value per delivery");
  if (s.exogenous.fuel_forwards.size() != s.fuels.size())
    throw ModelError("assembly: fuel forwards need one curve per fuel");
  for (const auto& curve : s.exogenous.fuel_forwards)
    if (curve.size() != n) throw ModelError("assembly: fuel forward curve length does not match the grid");
  if (s.exogenous.emission_forwards.size() != n)
    throw ModelError("assembly: emission forward curve length does not match the grid");
}

// Row builder collecting dense rows and their tags.
struct Rows {
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  std::vector<RowTag> tags;
  Eigen::Index dim;

  Eigen::VectorXd& add(double b, RowTag tag) {
    rows.push_back(Eigen::VectorXd::Zero(dim));
    rhs.push_back(b);
    tags.push_back(tag);
    return rows.back();
  }
  void emit(Eigen::MatrixXd& m, Eigen::VectorXd& v, std::vector<RowTag>& t) const {
    m.resize(static_cast<Eigen::Index>(rows.size()), dim);
    v.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      m.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
      v[static_cast<Eigen::Index>(k)] = rhs[k];
    }
    t = tags;
  }
};

Eigen::Index ix(std::size_t k) { return static_cast<Eigen::Index>(k); }

}  // namespace

PlayerProblem assemble_producer(const Producer& producer, const Scenario& s, const Eigen::MatrixXd& covariance) {
  check_dimensions(s, covariance);
  if (producer.plants.empty()) throw ModelError("producer '" + producer.name + "' has no plants");
  const TradingGrid& grid = s.grid;
  const std::size_t n = grid.contract_count();
  const std::size_t nf = s.fuels.size();
  const std::size_t nj = grid.delivery_count();

  PlayerProblem p;
  p.kind = PlayerKind::Producer;
  p.name = producer.name;
  p.risk_aversion = producer.risk_aversion;
  p.index_map = canonical_index(grid, producer, s);
  p.plant_of_slot = canonical_plant_order(producer, s);
  const IndexMap& im = p.index_map;
  const Eigen::Index dim = ix(im.size());
  const std::size_t slots = im.plant_count();

  std::vector<std::size_t> fuel_of_slot(slots);
  for (std::size_t k = 0; k < slots; ++k) fuel_of_slot[k] = s.fuel_index(producer.plants[p.plant_of_slot[k]].fuel);
  auto plant = [&](std::size_t slot) -> const PowerPlant& { return producer.plants[p.plant_of_slot[slot]]; };

  const Eigen::Index vfo = ix(n * (nf + 2));
  p.quadratic = Eigen::MatrixXd::Zero(dim, dim);
  p.quadratic.topLeftCorner(vfo, vfo) = producer.risk_aversion * covariance;

  p.linear = Eigen::VectorXd::Zero(dim);
  for (std::size_t node = 0; node < n; ++node) {
    const double d = grid.node_discount(node);
    for (std::size_t l = 0; l < nf; ++l) p.linear[ix(im.fuel(node, l))] = d * s.exogenous.fuel_forwards[l][node];
    p.linear[ix(im.emission(node))] = d * s.exogenous.emission_forwards[node];
  }

  Rows eq{{}, {}, {}, dim};
  for (std::size_t j = 0; j < nj; ++j) {
    Eigen::VectorXd& row = eq.add(0.0, {RowKind::VolumeBalance, j, 0, 0, 0});
    for (std::size_t i = 0; i < grid.trading_count(j); ++i) row[ix(im.volume(j, i))] = 1.0;
    for (std::size_t k = 0; k < slots; ++k) row[ix(im.production(j, k))] = 1.0;
  }
  for (std::size_t j = 0; j < nj; ++j) {
    for (std::size_t l = 0; l < nf; ++l) {
      Eigen::VectorXd& row = eq.add(0.0, {RowKind::FuelBalance, j, 0, l, 0});
      for (std::size_t k = 0; k < slots; ++k)
        if (fuel_of_slot[k] == l) row[ix(im.production(j, k))] = plant(k).efficiency;
      for (std::size_t i = 0; i < grid.trading_count(j); ++i) row[ix(im.fuel(grid.node(j, i), l))] = -1.0;
    }
  }
  {
    Eigen::VectorXd& row = eq.add(0.0, {RowKind::EmissionBalance, 0, 0, 0, 0});
    for (std::size_t j = 0; j < nj; ++j)
      for (std::size_t k = 0; k < slots; ++k)
        row[ix(im.production(j, k))] = s.fuels[fuel_of_slot[k]].emission_intensity;
    for (std::size_t node = 0; node < n; ++node) row[ix(im.emission(node))] = -1.0;
  }
  eq.emit(p.eq_matrix, p.eq_rhs, p.eq_tags);

  Rows in{{}, {}, {}, dim};
  for (std::size_t j = 0; j + 1 < nj; ++j) {
    for (std::size_t k = 0; k < slots; ++k) {
      Eigen::VectorXd& up = in.add(plant(k).ramp_up, {RowKind::RampUp, j, 0, fuel_of_slot[k], k});
      up[ix(im.production(j + 1, k))] = 1.0;
      up[ix(im.production(j, k))] = -1.0;
      Eigen::VectorXd& down = in.add(-plant(k).ramp_down, {RowKind::RampDown, j, 0, fuel_of_slot[k], k});
      down[ix(im.production(j + 1, k))] = -1.0;
      down[ix(im.production(j, k))] = 1.0;
    }
  }
  for (std::size_t j = 0; j < nj; ++j) {
    for (std::size_t k = 0; k < slots; ++k) {
      in.add(plant(k).capacity, {RowKind::CapacityUpper, j, 0, fuel_of_slot[k], k})[ix(im.production(j, k))] = 1.0;
      in.add(0.0, {RowKind::CapacityLower, j, 0, fuel_of_slot[k], k})[ix(im.production(j, k))] = -1.0;
    }
  }
  const double vt = s.bounds.v_trade;
  const double ft = s.bounds.f_trade;
  for (std::size_t node = 0; node < n; ++node) {
    const std::size_t j = grid.delivery_of(node);
    in.add(vt, {RowKind::VolumeUpper, j, node, 0, 0})[ix(im.volume(node))] = 1.0;
    in.add(vt, {RowKind::VolumeLower, j, node, 0, 0})[ix(im.volume(node))] = -1.0;
  }
  for (std::size_t node = 0; node < n; ++node) {
    const std::size_t j = grid.delivery_of(node);
    for (std::size_t l = 0; l < nf; ++l) {
      in.add(ft, {RowKind::FuelUpper, j, node, l, 0})[ix(im.fuel(node, l))] = 1.0;
      in.add(ft, {RowKind::FuelLower, j, node, l, 0})[ix(im.fuel(node, l))] = -1.0;
    }
  }
  for (std::size_t node = 0; node < n; ++node) {
    const std::size_t j = grid.delivery_of(node);
    in.add(ft, {RowKind::EmissionUpper, j, node, 0, 0})[ix(im.emission(node))] = 1.0;
    in.add(ft, {RowKind::EmissionLower, j, node, 0, 0})[ix(im.emission(node))] = -1.0;
  }
  in.emit(p.ineq_matrix, p.ineq_rhs, p.ineq_tags);
  return p;
}

PlayerProblem assemble_consumer(const Consumer& consumer, const Scenario& s, const Eigen::MatrixXd& covariance) {
  check_dimensions(s, covariance);
  const TradingGrid& grid = s.grid;
  const std::size_t n = grid.contract_count();

  PlayerProblem p;
  p.kind = PlayerKind::Consumer;
  p.name = consumer.name;
  p.risk_aversion = consumer.risk_aversion;
  p.index_map = canonical_index(grid);
  const Eigen::Index dim = ix(n);
  p.quadratic = consumer.risk_aversion * covariance.topLeftCorner(dim, dim);
  p.linear = Eigen::VectorXd::Zero(dim);

  Rows eq{{}, {}, {}, dim};
  for (std::size_t j = 0; j < grid.delivery_count(); ++j) {
    Eigen::VectorXd& row = eq.add(consumer.demand_share * s.exogenous.demand[j], {RowKind::DemandBalance, j, 0, 0, 0});
    for (std::size_t i = 0; i < grid.trading_count(j); ++i) row[ix(grid.node(j, i))] = 1.0;
  }
  eq.emit(p.eq_matrix, p.eq_rhs, p.eq_tags);

  Rows in{{}, {}, {}, dim};
  for (std::size_t node = 0; node < n; ++node) {
    const std::size_t j = grid.delivery_of(node);
    in.add(s.bounds.v_trade, {RowKind::VolumeUpper, j, node, 0, 0})[ix(node)] = 1.0;
    in.add(s.bounds.v_trade, {RowKind::VolumeLower, j, node, 0, 0})[ix(node)] = -1.0;
  }
  in.emit(p.ineq_matrix, p.ineq_rhs, p.ineq_tags);
  return p;
}

namespace {

Eigen::MatrixXd resolved_or_throw(const Scenario& s) {
  ResolvedCovariance rc = resolve_covariance(s);
  if (!rc.report.ok) throw CovarianceError(rc.report.message);
  return rc.matrix;
}

}  // namespace

PlayerProblem assemble_producer(const Producer& producer, const Scenario& s) {
  return assemble_producer(producer, s, resolved_or_throw(s));
}

PlayerProblem assemble_consumer(const Consumer& consumer, const Scenario& s) {
  return assemble_consumer(consumer, s, resolved_or_throw(s));
}

Market Market::assemble(const Scenario& s) {
  Market m;
  m.scenario = s;
  m.covariance = resolved_or_throw(s);
  m.a1 = delivery_sum_matrix(s.grid);
  const std::size_t n = s.grid.contract_count();
  const std::size_t nf = s.fuels.size();
  m.fuel_prices.resize(static_cast<Eigen::Index>(n * nf));
  m.emission_prices.resize(static_cast<Eigen::Index>(n));
  for (std::size_t node = 0; node < n; ++node) {
    const double d = s.grid.node_discount(node);
    for (std::size_t l = 0; l < nf; ++l) m.fuel_prices[ix(node * nf + l)] = d * s.exogenous.fuel_forwards.at(l).at(node);
    m.emission_prices[ix(node)] = d * s.exogenous.emission_forwards.at(node);
  }
  for (std::size_t k = 0; k < s.producers.size(); ++k) {
    m.players.push_back(assemble_producer(s.producers[k], s, m.covariance));
    m.players.back().player_index = k;
  }
  for (std::size_t k = 0; k < s.consumers.size(); ++k) {
    m.players.push_back(assemble_consumer(s.consumers[k], s, m.covariance));
    m.players.back().player_index = k;
  }
  return m;
}

}  // namespace equiterm
