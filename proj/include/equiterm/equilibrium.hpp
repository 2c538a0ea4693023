#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiterm/assembly.hpp"
#include "equiterm/player.hpp"

namespace equiterm {

enum class Method { Tatonnement, Newton, Hybrid };
const char* to_string(Method m);
std::optional<Method> parse_method(const std::string& s);

struct EquilibriumOptions {
  double tol = 1e-8;      // max-norm of the excess volume
  double kkt_tol = 1e-8;  // max player KKT residual
  int max_iter = 200;
  Method method = Method::Hybrid;
  std::optional<Eigen::VectorXd> initial_prices;
  PlayerOptions player;
};

enum class EquilibriumStatus { Converged, MaxIterations, SaturationWall, Stalled };
const char* to_string(EquilibriumStatus s);

struct TraceEntry {
  int iteration = 0;
  Eigen::VectorXd prices;
  double residual = 0.0;
  std::string step;  // "start", "newton", "tatonnement"
  double step_length = 0.0;
};

struct EquilibriumResult {
  Eigen::VectorXd prices;  // discounted expected prices, canonical node order
  std::vector<PlayerSolution> player_solutions;
  Eigen::VectorXd excess;
  double clearing_residual = 0.0;
  double max_kkt_residual = 0.0;
  double market_agent_objective = 0.0;  // prices . excess
  int iterations = 0;
  Method method = Method::Hybrid;
  EquilibriumStatus status = EquilibriumStatus::MaxIterations;
  std::vector<TraceEntry> trace;

  bool converged() const { return status == EquilibriumStatus::Converged; }
};

// Sum of all players' volume responses, evaluated with one warm-start slot per player.
class ExcessVolumeMap {
 public:
  explicit ExcessVolumeMap(const Market& market, PlayerOptions options = {});

  struct Evaluation {
    Eigen::VectorXd prices;
    Eigen::VectorXd excess;
    std::vector<PlayerSolution> solutions;
    double max_kkt = 0.0;
  };

  Evaluation evaluate(const Eigen::VectorXd& prices);
  Eigen::VectorXd operator()(const Eigen::VectorXd& prices) { return evaluate(prices).excess; }

  struct AggregateJacobian {
    Eigen::MatrixXd matrix;
    std::vector<ResponseJacobian> players;
    bool singular = false;
    bool on_boundary = false;
  };
  AggregateJacobian jacobian(const Evaluation& at) const;

  const Market& market() const { return *market_; }
  const PlayerOptions& options() const { return options_; }

 private:
  const Market* market_;
  PlayerOptions options_;
  std::vector<PlayerSolver> solvers_;
};

// Cold-start evaluation.
Eigen::VectorXd excess_volume(const Market& market, const Eigen::VectorXd& prices);

// Discounted cheapest marginal cost per delivery, replicated over its trading times.
Eigen::VectorXd merit_order_prices(const Market& market);

EquilibriumResult solve_equilibrium(const Market& market, const EquilibriumOptions& options = {});

// AllBounded: every plant sits on a capacity bound, some on each side.
enum class DeliveryStatus { Interior, AllUpper, AllLower, AllBounded };
const char* to_string(DeliveryStatus s);

struct SaturationReport {
  std::vector<DeliveryStatus> status;
  std::vector<double> clearing_sums;   // sum of the excess volume over each delivery's trading times
  std::vector<bool> sign_consistent;   // all-upper => sum < 0, all-lower => sum > 0

  bool any_saturated() const;
  bool consistent() const;
};

SaturationReport detect_saturation(const Market& market, const std::vector<PlayerSolution>& solutions,
                                   const PlayerOptions& options = {});
SaturationReport detect_saturation(const Market& market, const Eigen::VectorXd& prices,
                                   const PlayerOptions& options = {});

struct MonotonicitySample {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double inner_product = 0.0;
};

struct UniquenessOptions {
  std::size_t samples = 1000;
  double radius = 0.0;  // 0: 0.2 * (1 + max |price|)
  std::uint64_t seed = 1;
  PlayerOptions player;
};

struct DiagnosticsReport {
  std::vector<MonotonicitySample> monotonicity_samples;
  std::size_t skipped_saturated = 0;
  double sample_radius = 0.0;                  // final sampling radius around the query point
  bool monotone = false;                       // every sampled inner product < 0
  std::optional<double> jacobian_eigen_max;    // empty when not computed
  bool jacobian_degenerate = false;            // degenerate selection at the query point
  std::size_t rank = 0;
  std::size_t delivery_count = 0;
  bool rank_condition = false;
  std::vector<bool> strictly_feasible_plant_per_period;
  SaturationReport saturation_events;

  bool strict_uniqueness() const;
};

DiagnosticsReport check_uniqueness(const Market& market, const Eigen::VectorXd& prices,
                                   const UniquenessOptions& options = {});

// Rank of sum_p A1 J_p A1^T with a relative threshold.
std::size_t producer_rank(const Market& market, const std::vector<ResponseJacobian>& jacobians);

}  // namespace equiterm
