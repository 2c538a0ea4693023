#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "equiterm/grid.hpp"

// Scenario-tree price ensembles, Doob decomposition and drift re-selection.
// Templated on the scalar so trees with rational inputs can be checked exactly.
namespace equiterm {

class TreeError : public ModelError {
 public:
  using ModelError::ModelError;
};

template <class Scalar>
struct PricePath {
  Scalar weight{};
  std::vector<Scalar> pi;    // one value per contract node
  std::vector<Scalar> g;     // node-major, fuel inner (N * L)
  std::vector<Scalar> g_em;  // one value per contract node
  // Optional information-set id per filtration level. When absent for every
  // path the natural filtration of the observed values is used.
  std::vector<std::int64_t> history;
};

namespace detail {
template <class Scalar>
Scalar abs_value(const Scalar& x) {
  return x < Scalar(0) ? Scalar(-x) : x;
}
template <class Scalar>
Scalar weight_tolerance() {
  if constexpr (std::is_floating_point_v<Scalar>) return Scalar(1e-12);
  else return Scalar(0);
}
}  // namespace detail

template <class Scalar>
class PathEnsemble {
 public:
  PathEnsemble(TradingGrid grid, std::size_t fuel_count, std::vector<PricePath<Scalar>> paths)
      : grid_(std::move(grid)), fuel_count_(fuel_count), paths_(std::move(paths)) {
    check_shapes();
    build_cells();
  }

  const TradingGrid& grid() const { return grid_; }
  std::size_t fuel_count() const { return fuel_count_; }
  std::size_t path_count() const { return paths_.size(); }
  const std::vector<PricePath<Scalar>>& paths() const { return paths_; }
  const PricePath<Scalar>& path(std::size_t w) const { return paths_[w]; }

  std::size_t level_count() const { return grid_.levels().size(); }
  // Dense id of the information set containing path w at the given level.
  std::size_t cell(std::size_t level, std::size_t w) const { return cells_[level][w]; }
  std::size_t cell_count(std::size_t level) const { return cell_counts_[level]; }
  const std::vector<std::vector<std::size_t>>& cells() const { return cells_; }

  // Pathwise E[x | F_level].
  std::vector<Scalar> conditional_expectation(const std::vector<Scalar>& x, std::size_t level) const {
    const std::size_t cells = cell_counts_[level];
    std::vector<Scalar> num(cells, Scalar(0)), den(cells, Scalar(0)), plain(cells, Scalar(0));
    std::vector<std::size_t> count(cells, 0);
    for (std::size_t w = 0; w < paths_.size(); ++w) {
      const std::size_t c = cells_[level][w];
      num[c] += paths_[w].weight * x[w];
      den[c] += paths_[w].weight;
      plain[c] += x[w];
      ++count[c];
    }
    std::vector<Scalar> out(paths_.size());
    for (std::size_t w = 0; w < paths_.size(); ++w) {
      const std::size_t c = cells_[level][w];
      // Null cells carry no probability; any version of the expectation works.
      out[w] = den[c] > Scalar(0) ? Scalar(num[c] / den[c]) : Scalar(plain[c] / Scalar(static_cast<long>(count[c])));
    }
    return out;
  }

  Scalar expectation(const std::vector<Scalar>& x) const {
    Scalar s(0);
    for (std::size_t w = 0; w < paths_.size(); ++w) s += paths_[w].weight * x[w];
    return s;
  }

  // Column of electricity prices at one node across paths.
  std::vector<Scalar> pi_at(std::size_t node) const {
    std::vector<Scalar> out(paths_.size());
    for (std::size_t w = 0; w < paths_.size(); ++w) out[w] = paths_[w].pi[node];
    return out;
  }

  // (Pi, G, G_em) of one path as a single vector.
  std::vector<Scalar> state(std::size_t w) const {
    const PricePath<Scalar>& p = paths_[w];
    std::vector<Scalar> out(p.pi);
    out.insert(out.end(), p.g.begin(), p.g.end());
    out.insert(out.end(), p.g_em.begin(), p.g_em.end());
    return out;
  }

  // Same tree and weights, electricity prices replaced.
  PathEnsemble with_prices(const std::vector<std::vector<Scalar>>& pi) const {
    std::vector<PricePath<Scalar>> next = paths_;
    for (std::size_t w = 0; w < next.size(); ++w) {
      next[w].pi = pi[w];
      next[w].history.assign(cells_.size(), 0);
      for (std::size_t k = 0; k < cells_.size(); ++k) next[w].history[k] = static_cast<std::int64_t>(cells_[k][w]);
    }
    return PathEnsemble(grid_, fuel_count_, std::move(next));
  }

 private:
  void check_shapes() const {
    const std::size_t n = grid_.contract_count();
    if (paths_.empty()) throw TreeError("ensemble: no paths");
    Scalar total(0);
    for (const PricePath<Scalar>& p : paths_) {
      if (p.pi.size() != n || p.g.size() != n * fuel_count_ || p.g_em.size() != n)
        throw TreeError("ensemble: path dimensions do not match the grid");
      if (p.weight < Scalar(0)) throw TreeError("ensemble: negative path weight");
      total += p.weight;
    }
    if (detail::abs_value(Scalar(total - Scalar(1))) > detail::weight_tolerance<Scalar>())
      throw TreeError("ensemble: path weights must sum to 1");
  }

  // Values revealed by the end of level k, in a fixed order.
  std::vector<Scalar> revealed(const PricePath<Scalar>& p, std::size_t level) const {
    std::vector<Scalar> key;
    for (std::size_t node = 0; node < grid_.contract_count(); ++node) {
      if (grid_.level_of(node) > level) continue;
      key.push_back(p.pi[node]);
      for (std::size_t l = 0; l < fuel_count_; ++l) key.push_back(p.g[node * fuel_count_ + l]);
      key.push_back(p.g_em[node]);
    }
    return key;
  }

  void build_cells() {
    const std::size_t levels = level_count();
    std::size_t with_history = 0;
    for (const PricePath<Scalar>& p : paths_) with_history += p.history.empty() ? 0 : 1;
    if (with_history != 0 && with_history != paths_.size())
      throw TreeError("ensemble: either every path or no path carries a history");
    cells_.assign(levels, std::vector<std::size_t>(paths_.size(), 0));
    cell_counts_.assign(levels, 0);

    for (std::size_t k = 0; k < levels; ++k) {
      if (with_history != 0) {
        std::map<std::int64_t, std::size_t> ids;
        for (std::size_t w = 0; w < paths_.size(); ++w) {
          if (paths_[w].history.size() != levels) throw TreeError("ensemble: history length must equal the level count");
          auto [it, inserted] = ids.emplace(paths_[w].history[k], ids.size());
          cells_[k][w] = it->second;
        }
        cell_counts_[k] = ids.size();
      } else {
        std::map<std::vector<Scalar>, std::size_t> ids;
        for (std::size_t w = 0; w < paths_.size(); ++w) {
          auto [it, inserted] = ids.emplace(revealed(paths_[w], k), ids.size());
          cells_[k][w] = it->second;
        }
        cell_counts_[k] = ids.size();
      }
    }
    if (with_history == 0) return;

    // Supplied histories must form a tree and reveal the observed values.
    for (std::size_t k = 0; k < levels; ++k) {
      std::vector<std::size_t> first(cell_counts_[k], paths_.size());
      for (std::size_t w = 0; w < paths_.size(); ++w) {
        std::size_t& f = first[cells_[k][w]];
        if (f == paths_.size()) {
          f = w;
          continue;
        }
        if (k > 0 && cells_[k - 1][w] != cells_[k - 1][f])
          throw TreeError("ensemble: information sets are not nested at level " + std::to_string(k));
        if (revealed(paths_[w], k) != revealed(paths_[f], k))
          throw TreeError("ensemble: paths sharing an information set differ on revealed values at level " +
                          std::to_string(k));
      }
    }
  }

  TradingGrid grid_;
  std::size_t fuel_count_;
  std::vector<PricePath<Scalar>> paths_;
  std::vector<std::vector<std::size_t>> cells_;  // [level][path]
  std::vector<std::size_t> cell_counts_;
};

template <class Scalar>
struct DoobParts {
  std::vector<std::vector<Scalar>> martingale;   // [path][node]
  std::vector<std::vector<Scalar>> predictable;  // [path][node], zero at each delivery's first trading time
};

template <class Scalar>
struct DoobCheck {
  Scalar reconstruction{};  // max |Pi - M - A|
  Scalar martingale{};      // max |E[M(t_k) | F_{k-1}] - M(t_{k-1})|
  Scalar predictability{};  // max |A(t_k) - E[A(t_k) | F_{k-1}]|
};

// Telescoping decomposition along the trading times of each delivery:
// M(t_i) = Pi(t_0) + sum_k (Pi(t_k) - E[Pi(t_k) | F_{k-1}]),
// A(t_i) = sum_k (E[Pi(t_k) | F_{k-1}] - Pi(t_{k-1})).
template <class Scalar>
DoobParts<Scalar> doob_decompose(const PathEnsemble<Scalar>& e) {
  const TradingGrid& grid = e.grid();
  const std::size_t n = grid.contract_count();
  DoobParts<Scalar> out;
  out.martingale.assign(e.path_count(), std::vector<Scalar>(n, Scalar(0)));
  out.predictable.assign(e.path_count(), std::vector<Scalar>(n, Scalar(0)));
  for (std::size_t j = 0; j < grid.delivery_count(); ++j) {
    const std::size_t n0 = grid.first_node(j);
    for (std::size_t w = 0; w < e.path_count(); ++w) out.martingale[w][n0] = e.path(w).pi[n0];
    for (std::size_t i = 1; i < grid.trading_count(j); ++i) {
      const std::size_t node = n0 + i;
      const std::vector<Scalar> cond = e.conditional_expectation(e.pi_at(node), grid.level_of(node - 1));
      for (std::size_t w = 0; w < e.path_count(); ++w) {
        const std::vector<Scalar>& pi = e.path(w).pi;
        out.martingale[w][node] = out.martingale[w][node - 1] + (pi[node] - cond[w]);
        out.predictable[w][node] = out.predictable[w][node - 1] + (cond[w] - pi[node - 1]);
      }
    }
  }
  return out;
}

template <class Scalar>
DoobCheck<Scalar> check_doob(const PathEnsemble<Scalar>& e, const DoobParts<Scalar>& parts) {
  using detail::abs_value;
  const TradingGrid& grid = e.grid();
  DoobCheck<Scalar> c{Scalar(0), Scalar(0), Scalar(0)};
  auto raise = [](Scalar& acc, const Scalar& v) {
    if (acc < v) acc = v;
  };
  for (std::size_t node = 0; node < grid.contract_count(); ++node)
    for (std::size_t w = 0; w < e.path_count(); ++w)
      raise(c.reconstruction,
            abs_value(Scalar(e.path(w).pi[node] - parts.martingale[w][node] - parts.predictable[w][node])));
  for (std::size_t j = 0; j < grid.delivery_count(); ++j) {
    for (std::size_t i = 1; i < grid.trading_count(j); ++i) {
      const std::size_t node = grid.node(j, i);
      const std::size_t level = grid.level_of(node - 1);
      std::vector<Scalar> m(e.path_count()), a(e.path_count());
      for (std::size_t w = 0; w < e.path_count(); ++w) {
        m[w] = parts.martingale[w][node];
        a[w] = parts.predictable[w][node];
      }
      const std::vector<Scalar> em = e.conditional_expectation(m, level);
      const std::vector<Scalar> ea = e.conditional_expectation(a, level);
      for (std::size_t w = 0; w < e.path_count(); ++w) {
        raise(c.martingale, abs_value(Scalar(em[w] - parts.martingale[w][node - 1])));
        raise(c.predictability, abs_value(Scalar(a[w] - ea[w])));
      }
    }
  }
  return c;
}

// Per-path, per-node drift values for the shifted measure.
template <class Scalar>
struct DriftTable {
  std::vector<std::vector<Scalar>> values;  // [path][node]

  static DriftTable deterministic(const std::vector<Scalar>& per_node, std::size_t path_count) {
    return DriftTable{std::vector<std::vector<Scalar>>(path_count, per_node)};
  }
};

// Relative: Pi' = M + drift, with M(t_0) = Pi(t_0) and drift(t_0) = 0.
// Level: Pi' = M - E[Pi(t_0)] + drift, so the drift is the expected price level
// and drift(t_0) may be any deterministic value.
enum class DriftConvention { Relative, Level };

template <class Scalar>
PathEnsemble<Scalar> shift_measure(const PathEnsemble<Scalar>& e, const DriftTable<Scalar>& drift,
                                   DriftConvention convention = DriftConvention::Relative) {
  const TradingGrid& grid = e.grid();
  const std::size_t n = grid.contract_count();
  if (drift.values.size() != e.path_count()) throw TreeError("drift: one row per path is required");
  for (const auto& row : drift.values)
    if (row.size() != n) throw TreeError("drift: one value per contract node is required");

  for (std::size_t j = 0; j < grid.delivery_count(); ++j) {
    const std::size_t n0 = grid.first_node(j);
    for (std::size_t w = 0; w < e.path_count(); ++w) {
      const Scalar& d0 = drift.values[w][n0];
      if (convention == DriftConvention::Relative && d0 != Scalar(0))
        throw TreeError("drift: must vanish at the first trading time of delivery " + std::to_string(j));
      if (convention == DriftConvention::Level && d0 != drift.values[0][n0])
        throw TreeError("drift: first trading time of delivery " + std::to_string(j) + " must be deterministic");
    }
    for (std::size_t i = 1; i < grid.trading_count(j); ++i) {
      const std::size_t node = n0 + i;
      const std::size_t level = grid.level_of(node - 1);
      std::vector<std::size_t> first(e.cell_count(level), e.path_count());
      for (std::size_t w = 0; w < e.path_count(); ++w) {
        std::size_t& f = first[e.cell(level, w)];
        if (f == e.path_count()) f = w;
        else if (drift.values[w][node] != drift.values[f][node])
          throw TreeError("drift: not predictable at node " + std::to_string(node));
      }
    }
  }

  const DoobParts<Scalar> parts = doob_decompose(e);
  std::vector<std::vector<Scalar>> pi(e.path_count(), std::vector<Scalar>(n));
  for (std::size_t j = 0; j < grid.delivery_count(); ++j) {
    const std::size_t n0 = grid.first_node(j);
    Scalar level_shift(0);
    if (convention == DriftConvention::Level) level_shift = e.expectation(e.pi_at(n0));
    for (std::size_t i = 0; i < grid.trading_count(j); ++i)
      for (std::size_t w = 0; w < e.path_count(); ++w)
        pi[w][n0 + i] = parts.martingale[w][n0 + i] - level_shift + drift.values[w][n0 + i];
  }
  return e.with_prices(pi);
}

// Weighted population covariance of the (Pi, G, G_em) state, row-major.
template <class Scalar>
std::vector<Scalar> weighted_state_covariance(const PathEnsemble<Scalar>& e) {
  const std::size_t dim = e.state(0).size();
  std::vector<Scalar> mean(dim, Scalar(0));
  std::vector<std::vector<Scalar>> states;
  states.reserve(e.path_count());
  for (std::size_t w = 0; w < e.path_count(); ++w) {
    states.push_back(e.state(w));
    for (std::size_t a = 0; a < dim; ++a) mean[a] += e.path(w).weight * states.back()[a];
  }
  std::vector<Scalar> cov(dim * dim, Scalar(0));
  for (std::size_t w = 0; w < e.path_count(); ++w) {
    std::vector<Scalar> d(dim);
    for (std::size_t a = 0; a < dim; ++a) d[a] = states[w][a] - mean[a];
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) cov[a * dim + b] += e.path(w).weight * d[a] * d[b];
  }
  return cov;
}

template <class Scalar>
struct InvarianceReport {
  std::size_t dimension = 0;
  Scalar max_abs_deviation{};                  // shifted vs original
  Scalar max_abs_deviation_vs_martingale{};    // shifted vs the original's martingale part
};

template <class Scalar>
InvarianceReport<Scalar> verify_covariance_invariance(const PathEnsemble<Scalar>& original,
                                                      const PathEnsemble<Scalar>& shifted) {
  if (original.path_count() != shifted.path_count() || original.cells() != shifted.cells())
    throw TreeError("covariance invariance: ensembles must share the tree");
  for (std::size_t w = 0; w < original.path_count(); ++w)
    if (original.path(w).weight != shifted.path(w).weight)
      throw TreeError("covariance invariance: ensembles must share the weights");

  const std::vector<Scalar> c0 = weighted_state_covariance(original);
  const std::vector<Scalar> c1 = weighted_state_covariance(shifted);
  const PathEnsemble<Scalar> mart = original.with_prices(doob_decompose(original).martingale);
  const std::vector<Scalar> cm = weighted_state_covariance(mart);

  InvarianceReport<Scalar> r;
  r.dimension = original.state(0).size();
  r.max_abs_deviation = Scalar(0);
  r.max_abs_deviation_vs_martingale = Scalar(0);
  for (std::size_t k = 0; k < c0.size(); ++k) {
    const Scalar d0 = detail::abs_value(Scalar(c1[k] - c0[k]));
    const Scalar dm = detail::abs_value(Scalar(c1[k] - cm[k]));
    if (r.max_abs_deviation < d0) r.max_abs_deviation = d0;
    if (r.max_abs_deviation_vs_martingale < dm) r.max_abs_deviation_vs_martingale = dm;
  }
  return r;
}

}  // namespace equiterm
