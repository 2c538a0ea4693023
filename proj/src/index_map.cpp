#include <stdexcept>

#include "equiterm/index_map.hpp"

namespace equiterm {

IndexMap::IndexMap(const TradingGrid& grid, std::vector<std::size_t> plants_per_fuel)
    : producer_(true),
      contracts_(grid.contract_count()),
      deliveries_(grid.delivery_count()),
      plants_per_fuel_(std::move(plants_per_fuel)) {
  for (std::size_t j = 0; j < deliveries_; ++j) grid_first_.push_back(grid.first_node(j));
  for (std::size_t n = 0; n < contracts_; ++n) node_delivery_.push_back(grid.delivery_of(n));
  for (std::size_t count : plants_per_fuel_) {
    fuel_offset_in_block_.push_back(plants_per_delivery_);
    plants_per_delivery_ += count;
  }
  size_ = contracts_ * (fuel_count() + 2) + deliveries_ * plants_per_delivery_;
}

IndexMap::IndexMap(const TradingGrid& grid)
    : producer_(false), contracts_(grid.contract_count()), deliveries_(grid.delivery_count()), size_(contracts_) {
  for (std::size_t j = 0; j < deliveries_; ++j) grid_first_.push_back(grid.first_node(j));
  for (std::size_t n = 0; n < contracts_; ++n) node_delivery_.push_back(grid.delivery_of(n));
}

std::size_t IndexMap::index_of(const VarTuple& t) const {
  if (t.delivery >= deliveries_) throw std::out_of_range("index map: delivery out of range");
  if (t.kind == VarKind::Production) {
    if (!producer_ || t.fuel >= fuel_count() || t.plant >= plants_per_fuel_[t.fuel])
      throw std::out_of_range("index map: production variable out of range");
    return production(t.delivery, plant_slot(t.fuel, t.plant));
  }
  const std::size_t first = grid_first_[t.delivery];
  const std::size_t last = t.delivery + 1 < deliveries_ ? grid_first_[t.delivery + 1] : contracts_;
  if (first + t.trading >= last) throw std::out_of_range("index map: trading time out of range");
  const std::size_t node = first + t.trading;
  switch (t.kind) {
    case VarKind::Volume:
      return volume(node);
    case VarKind::Fuel:
      if (!producer_ || t.fuel >= fuel_count()) throw std::out_of_range("index map: fuel out of range");
      return fuel(node, t.fuel);
    case VarKind::Emission:
      if (!producer_) throw std::out_of_range("index map: consumers hold no emission variables");
      return emission(node);
    default:
      break;
  }
  throw std::out_of_range("index map: unknown kind");
}

VarTuple IndexMap::tuple_of(std::size_t k) const {
  if (k >= size_) throw std::out_of_range("index map: position out of range");
  VarTuple t;
  auto at_node = [&](std::size_t node) {
    t.delivery = node_delivery_[node];
    t.trading = node - grid_first_[t.delivery];
  };
  if (k < fuel_begin() || !producer_) {
    t.kind = VarKind::Volume;
    at_node(k);
  } else if (k < emission_begin()) {
    t.kind = VarKind::Fuel;
    at_node((k - fuel_begin()) / fuel_count());
    t.fuel = (k - fuel_begin()) % fuel_count();
  } else if (k < production_begin()) {
    t.kind = VarKind::Emission;
    at_node(k - emission_begin());
  } else {
    t.kind = VarKind::Production;
    t.delivery = (k - production_begin()) / plants_per_delivery_;
    std::size_t slot = (k - production_begin()) % plants_per_delivery_;
    std::size_t l = 0;
    while (slot >= plants_per_fuel_[l]) slot -= plants_per_fuel_[l++];
    t.fuel = l;
    t.plant = slot;
  }
  return t;
}

}  // namespace equiterm
