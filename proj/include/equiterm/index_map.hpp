#pragma once

#include <cstddef>
#include <vector>

#include "equiterm/grid.hpp"

namespace equiterm {

enum class VarKind { Volume, Fuel, Emission, Production };

// Fields that do not apply to a kind are zero. For Production, `trading` is
// unused and `plant` counts within the fuel group.
struct VarTuple {
  VarKind kind = VarKind::Volume;
  std::size_t delivery = 0;
  std::size_t trading = 0;
  std::size_t fuel = 0;
  std::size_t plant = 0;

  bool operator==(const VarTuple&) const = default;
};

// Flat positions of one player's decision vector (V, F, O, W). Each block is
// ordered delivery-major, then trading time, then fuel, then plant.
class IndexMap {
 public:
  IndexMap() = default;
  // Producer layout; plants_per_fuel[l] is the number of plants burning fuel l.
  IndexMap(const TradingGrid& grid, std::vector<std::size_t> plants_per_fuel);
  // Consumer layout: volumes only.
  explicit IndexMap(const TradingGrid& grid);

  bool is_producer() const { return producer_; }
  std::size_t size() const { return size_; }
  std::size_t contracts() const { return contracts_; }
  std::size_t fuel_count() const { return plants_per_fuel_.size(); }
  std::size_t plant_count() const { return plants_per_delivery_; }
  std::size_t plants_in_fuel(std::size_t l) const { return plants_per_fuel_[l]; }
  // Position of plant r of fuel l within one delivery's production block.
  std::size_t plant_slot(std::size_t l, std::size_t r) const { return fuel_offset_in_block_[l] + r; }

  std::size_t volume(std::size_t node) const { return node; }
  std::size_t volume(std::size_t j, std::size_t i) const { return grid_first_[j] + i; }
  std::size_t fuel(std::size_t node, std::size_t l) const { return contracts_ + node * fuel_count() + l; }
  std::size_t emission(std::size_t node) const { return contracts_ * (fuel_count() + 1) + node; }
  std::size_t production(std::size_t j, std::size_t slot) const {
    return contracts_ * (fuel_count() + 2) + j * plants_per_delivery_ + slot;
  }

  std::size_t volume_begin() const { return 0; }
  std::size_t fuel_begin() const { return contracts_; }
  std::size_t emission_begin() const { return contracts_ * (fuel_count() + 1); }
  std::size_t production_begin() const { return producer_ ? contracts_ * (fuel_count() + 2) : size_; }

  std::size_t index_of(const VarTuple& t) const;
  VarTuple tuple_of(std::size_t k) const;

 private:
  bool producer_ = false;
  std::size_t contracts_ = 0;
  std::size_t deliveries_ = 0;
  std::size_t size_ = 0;
  std::size_t plants_per_delivery_ = 0;
  std::vector<std::size_t> grid_first_;
  std::vector<std::size_t> node_delivery_;
  std::vector<std::size_t> plants_per_fuel_;
  std::vector<std::size_t> fuel_offset_in_block_;
};

}  // namespace equiterm
