#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "equiterm/covariance.hpp"

using namespace equiterm;

namespace {

TradingGrid one_node(double r = 0.0) { return TradingGrid({{1.0, {1.0}}}, r); }

PathEnsemble<double> random_ensemble(const TradingGrid& grid, std::size_t paths, std::uint64_t seed,
                                     bool copy_fuel_from_power) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t n = grid.contract_count();
  std::vector<PricePath<double>> out;
  for (std::size_t w = 0; w < paths; ++w) {
    PricePath<double> p{1.0 / static_cast<double>(paths), {}, {}, {}, {}};
    for (std::size_t k = 0; k < n; ++k) {
      p.pi.push_back(z(rng));
      p.g.push_back(copy_fuel_from_power ? p.pi.back() : z(rng));
      p.g_em.push_back(z(rng));
    }
    out.push_back(p);
  }
  return PathEnsemble<double>(grid, 1, out);
}

}  // namespace

TEST_CASE("two-point power price has unit variance") {
  const std::vector<PricePath<double>> paths{{0.5, {0.0}, {8.0}, {10.0}, {}}, {0.5, {2.0}, {8.0}, {10.0}, {}}};
  const PathEnsemble<double> e(one_node(), 1, paths);
  const Eigen::MatrixXd c = weighted_covariance(e);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(0, 1) == 0.0);
  CHECK(c(0, 2) == 0.0);
  CHECK(c(1, 1) == 0.0);
  CHECK(weighted_mean(e)[0] == 1.0);
}

TEST_CASE("discounting scales the covariance") {
  const std::vector<PricePath<double>> paths{{0.5, {0.0}, {8.0}, {10.0}, {}}, {0.5, {2.0}, {8.0}, {10.0}, {}}};
  const PathEnsemble<double> e(one_node(0.1), 1, paths);
  CHECK(weighted_covariance(e)(0, 0) == doctest::Approx(std::exp(-0.2)));
  CHECK(weighted_covariance(e, false)(0, 0) == 1.0);
}

TEST_CASE("exact dependence between fuel and power is rejected") {
  const TradingGrid g({{1.0, {0.5, 1.0}}}, 0.0);
  CHECK_THROWS_AS(estimate_covariance(random_ensemble(g, 200, 4, true)), CovarianceError);
  const CovarianceBlocks ok = estimate_covariance(random_ensemble(g, 200, 4, false));
  CHECK(ok.q1.rows() == 2);
  CHECK(ok.q2.cols() == 4);
  CHECK(ok.q3.rows() == 4);
}

TEST_CASE("independent paths give small off-diagonals") {
  const TradingGrid g({{1.0, {0.5, 1.0}}, {2.0, {2.0}}}, 0.0);
  const Eigen::MatrixXd c = weighted_covariance(random_ensemble(g, 1000, 17, false));
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index k = 0; k < c.cols(); ++k)
      if (i != k) CHECK(std::abs(c(i, k)) < 0.15);
}

TEST_CASE("ridge rule") {
  Eigen::MatrixXd small = Eigen::Vector2d(1.0, 5e-11).asDiagonal();
  const PdReport a = enforce_positive_definite(small);
  CHECK(a.ok);
  CHECK(a.ridge == doctest::Approx(5e-11).epsilon(1e-6));
  CHECK(small(1, 1) == doctest::Approx(1e-10).epsilon(1e-6));

  Eigen::MatrixXd singular(2, 2);
  singular << 1, 1, 1, 1;
  CHECK_FALSE(enforce_positive_definite(singular).ok);

  Eigen::MatrixXd negative = Eigen::Vector2d(1.0, -1e-3).asDiagonal();
  CHECK_FALSE(enforce_positive_definite(negative).ok);

  Eigen::MatrixXd lopsided(2, 2);
  lopsided << 2, 1, 0.5, 2;
  CHECK(enforce_positive_definite(lopsided).ok);
  CHECK(lopsided(0, 1) == lopsided(1, 0));
}

TEST_CASE("blocks split and stack") {
  const Eigen::MatrixXd full = Eigen::MatrixXd::Random(6, 6);
  const CovarianceBlocks b = CovarianceBlocks::split(full, 2);
  CHECK(b.q1.rows() == 2);
  CHECK(b.q2.cols() == 4);
  CHECK(b.stacked().topLeftCorner(2, 2) == full.topLeftCorner(2, 2));
  CHECK(b.stacked().bottomRightCorner(4, 4) == full.bottomRightCorner(4, 4));
}

TEST_CASE("ensemble scenarios resolve to a positive definite matrix") {
  Scenario s = equiterm::testing::simple_scenario(1, 2, 5.0, 10.0);
  s.exogenous.covariance.reset();
  s.exogenous.ensemble = random_ensemble(s.grid, 50, 6, false);
  const ResolvedCovariance rc = resolve_covariance(s);
  CHECK(rc.report.ok);
  CHECK(rc.matrix.rows() == 6);
  CHECK(rc.matrix == weighted_covariance(*s.exogenous.ensemble));
}
