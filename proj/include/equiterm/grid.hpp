#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace equiterm {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Delivery {
  double time = 0.0;
  std::vector<double> trading_times;
};

// Delivery periods T_j with their trading dates. Contracts (nodes) are numbered
// delivery-major, then by trading time.
class TradingGrid {
 public:
  TradingGrid() = default;
  TradingGrid(std::vector<Delivery> deliveries, double interest_rate);

  std::size_t delivery_count() const { return deliveries_.size(); }
  std::size_t contract_count() const { return node_delivery_.size(); }
  std::size_t trading_count(std::size_t j) const { return deliveries_[j].trading_times.size(); }
  std::size_t first_node(std::size_t j) const { return first_node_[j]; }
  std::size_t node(std::size_t j, std::size_t i) const { return first_node_[j] + i; }
  std::size_t delivery_of(std::size_t node) const { return node_delivery_[node]; }
  double trading_time(std::size_t node) const;

  const std::vector<Delivery>& deliveries() const { return deliveries_; }
  double interest_rate() const { return interest_rate_; }

  // exp(-r T_j)
  double discount(std::size_t j) const;
  double node_discount(std::size_t node) const { return discount(node_delivery_[node]); }

  // Sorted union of all trading times; the information levels of the filtration.
  const std::vector<double>& levels() const { return levels_; }
  std::size_t level_of(std::size_t node) const { return node_level_[node]; }

 private:
  std::vector<Delivery> deliveries_;
  double interest_rate_ = 0.0;
  std::vector<std::size_t> first_node_;
  std::vector<std::size_t> node_delivery_;
  std::vector<double> levels_;
  std::vector<std::size_t> node_level_;
};

}  // namespace equiterm
