#include <algorithm>
#include <cmath>

#include "equiterm/model.hpp"

namespace equiterm {

TradingGrid::TradingGrid(std::vector<Delivery> deliveries, double interest_rate)
    : deliveries_(std::move(deliveries)), interest_rate_(interest_rate) {
  if (deliveries_.empty()) throw ModelError("grid: at least one delivery period is required");
  if (!std::isfinite(interest_rate_)) throw ModelError("grid: interest rate must be finite");
  for (std::size_t j = 0; j < deliveries_.size(); ++j) {
    const Delivery& d = deliveries_[j];
    if (!std::isfinite(d.time)) throw ModelError("grid: delivery time must be finite");
    if (j > 0 && !(d.time > deliveries_[j - 1].time))
      throw ModelError("grid: delivery times must be strictly increasing");
    if (d.trading_times.empty()) throw ModelError("grid: delivery " + std::to_string(j) + " has no trading times");
    for (std::size_t i = 1; i < d.trading_times.size(); ++i)
      if (!(d.trading_times[i] > d.trading_times[i - 1]))
        throw ModelError("grid: trading times of delivery " + std::to_string(j) + " must be strictly increasing");
    if (d.trading_times.back() != d.time)
      throw ModelError("grid: last trading time of delivery " + std::to_string(j) + " must equal its delivery time");
    first_node_.push_back(node_delivery_.size());
    node_delivery_.insert(node_delivery_.end(), d.trading_times.size(), j);
    levels_.insert(levels_.end(), d.trading_times.begin(), d.trading_times.end());
  }
  std::sort(levels_.begin(), levels_.end());
  levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
  for (std::size_t n = 0; n < node_delivery_.size(); ++n)
    node_level_.push_back(static_cast<std::size_t>(
        std::lower_bound(levels_.begin(), levels_.end(), trading_time(n)) - levels_.begin()));
}

double TradingGrid::trading_time(std::size_t node) const {
  const std::size_t j = node_delivery_[node];
  return deliveries_[j].trading_times[node - first_node_[j]];
}

double TradingGrid::discount(std::size_t j) const { return std::exp(-interest_rate_ * deliveries_[j].time); }

std::size_t Scenario::fuel_index(const std::string& name) const {
  for (std::size_t l = 0; l < fuels.size(); ++l)
    if (fuels[l].name == name) return l;
  throw ModelError("unknown fuel '" + name + "'");
}

double Scenario::total_capacity() const {
  double s = 0.0;
  for (const Producer& p : producers)
    for (const PowerPlant& r : p.plants) s += r.capacity;
  return s;
}

double marginal_cost(const PowerPlant& plant, const Fuel& fuel, double fuel_price, double emission_price) {
  return plant.efficiency * fuel_price + fuel.emission_intensity * emission_price;
}

}  // namespace equiterm
