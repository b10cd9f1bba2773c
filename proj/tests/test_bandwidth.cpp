#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dimest/bandwidth.hpp"
#include "dimest/estimators.hpp"
#include "dimest/kernel.hpp"
#include "dimest/manifolds.hpp"

using namespace dimest;

TEST_CASE("grid endpoints from quantiles") {
  // Type-7 quantiles of 101 sorted values: q_0.01 = v[1], q_0.99 = v[99].
  Vector sq(101);
  sq[0] = 0.0;
  sq[1] = 0.04;
  for (int i = 2; i < 99; ++i) sq[i] = 0.5;
  sq[99] = 1.0;
  sq[100] = 2.0;
  const auto grid = make_grid_sq(sq, 8);
  REQUIRE(grid.size() == 8);
  CHECK(grid.front() == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(grid.back() == doctest::Approx(4.0).epsilon(1e-15));
  const double ratio = grid[1] / grid[0];
  CHECK(ratio == doctest::Approx(std::pow(400.0, 1.0 / 7.0)).epsilon(1e-14));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i] > grid[i - 1]);
    CHECK(grid[i] / grid[i - 1] == doctest::Approx(ratio).epsilon(1e-12));
  }
}

TEST_CASE("grid scales with squared distance") {
  const auto cloud = sample(ManifoldSpec::sphere(2), 500, 4);
  const Point x = Point::Zero(3);
  const auto g1 = make_grid(cloud, x, 16);
  const auto g2 = make_grid(PointCloud(2.0 * cloud), x, 16);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == doctest::Approx(4.0 * g1[i]).epsilon(1e-13));
}

TEST_CASE("grid errors") {
  Vector sq = Vector::Zero(5);
  CHECK_THROWS_AS(make_grid_sq(sq, 16), DegenerateGeometryError);
  Vector ok = Vector::LinSpaced(5, 1.0, 5.0);
  CHECK_THROWS_AS(make_grid_sq(ok, 4), DomainError);
}

TEST_CASE("curvature rule, single sample") {
  const double r2 = 0.7, delta = 1e-3;
  Vector sq(1);
  sq << r2;
  std::vector<double> grid;
  for (int i = 0; i < 12; ++i) grid.push_back(0.01 * std::pow(2.0, i));
  const auto scan = select_bandwidth_curvature_sq(sq, grid, delta);
  CHECK(scan.chosen_index == 0);
  CHECK(scan.t_star == grid[0]);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = r2 / grid[i];
    CHECK(scan.points[i].rho == doctest::Approx(u / (u + delta)).epsilon(1e-12));
  }
}

TEST_CASE("curvature rule, equidistant samples") {
  Vector sq = Vector::Constant(9, 0.4);
  std::vector<double> grid = {0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8};
  const auto scan = select_bandwidth_curvature_sq(sq, grid, 0.01);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = 0.4 / grid[i];
    CHECK(scan.points[i].G2 == doctest::Approx(-u).epsilon(1e-13));
    CHECK(scan.points[i].rho == doctest::Approx(u / (u + 0.01)).epsilon(1e-12));
  }
}

TEST_CASE("ties go to the smaller bandwidth") {
  Vector sq = Vector::Zero(4);
  std::vector<double> grid = {0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8};
  const auto c = select_bandwidth_curvature_sq(sq, grid);
  CHECK(c.chosen_index == 0);
  CHECK(c.d_hat == 0.0);
  const auto s = select_bandwidth_slope_max_sq(sq, grid);
  CHECK(s.chosen_index == 0);
  CHECK(s.t_star == grid[0]);
  CHECK(s.d_hat == 0.0);
  for (const auto& p : s.points) CHECK(p.slope == 0.0);
}

TEST_CASE("selected d_hat equals the local estimator at t*") {
  const auto cloud = sample(ManifoldSpec::torus(), 3000, 8);
  const Point x = ManifoldSpec::torus().reference_point();
  const auto grid = make_grid(cloud, x);
  for (const auto& scan : {select_bandwidth_curvature(x, cloud, grid), select_bandwidth_slope_max(x, cloud, grid)}) {
    CHECK(scan.d_hat == local_dim_estimate(x, cloud, scan.t_star).d_hat);
    CHECK(scan.t_star == grid[static_cast<std::size_t>(scan.chosen_index)]);
  }
}

TEST_CASE("curvature rule on the unit ball") {
  const auto cloud = sample(ManifoldSpec::ball(3), 10000, 1);
  const Point x = Point::Zero(3);
  const auto scan = select_bandwidth_curvature(x, cloud, make_grid(cloud, x));
  CHECK(std::abs(scan.d_hat - 3.0) <= 0.4);
  // Interior of the grid and on the flat part of the slope curve.
  CHECK(scan.chosen_index > 0);
  CHECK(scan.chosen_index < static_cast<int>(scan.points.size()) - 1);
  CHECK(std::abs(scan.points[static_cast<std::size_t>(scan.chosen_index)].G2) < 0.5);
}

TEST_CASE("slope maximum on the five-ball overshoots slightly") {
  const auto cloud = sample(ManifoldSpec::ball(5), 100000, 7);
  const Point x = Point::Zero(5);
  const auto scan = select_bandwidth_slope_max(x, cloud, make_grid(cloud, x));
  CHECK(scan.d_hat >= 5.0);
  CHECK(scan.d_hat < 6.0);
}
