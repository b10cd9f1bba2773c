#include "dimest/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dimest/estimators.hpp"
#include "dimest/kernel.hpp"

namespace dimest {
namespace {

// Linear-interpolation quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("bandwidth grid is empty");
  for (double t : grid) detail::check_bandwidth(t);
}

BandwidthScan scan(const Vector& sq_dist, const std::vector<double>& grid, double delta, SelectionRule rule) {
  check_grid(grid);
  if (sq_dist.size() < 1) throw DomainError("point cloud is empty");
  BandwidthScan out;
  out.grid = grid;
  out.delta = delta;
  out.rule = rule;
  out.points.reserve(grid.size());
  for (double t : grid) {
    const auto g = g_derivatives_sq(sq_dist, std::log(t));
    const double log_s2 = log_kernel_sum_sq(sq_dist, 2.0 * t).log_S;
    ScanPoint p{};
    p.t = t;
    p.G = g.G;
    p.S = std::exp(g.G);
    p.G1 = g.G1;
    p.G2 = g.G2;
    p.rho = g.G1 / (std::abs(g.G2) + delta);
    p.slope = (log_s2 - g.G) / std::numbers::ln2;
    out.points.push_back(p);
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < out.points.size(); ++j) {
    const double cand = rule == SelectionRule::curvature_ratio ? out.points[j].rho : out.points[j].slope;
    const double cur = rule == SelectionRule::curvature_ratio ? out.points[best].rho : out.points[best].slope;
    if (cand > cur) best = j;
  }
  out.chosen_index = static_cast<int>(best);
  out.t_star = grid[best];
  out.d_hat = local_dim_from_sq(sq_dist, out.t_star);
  return out;
}

}  // namespace

std::vector<double> make_grid_sq(const Vector& sq_dist, int count) {
  if (count < 8) throw DomainError("bandwidth grid needs at least 8 points");
  if (sq_dist.size() < 1) throw DomainError("point cloud is empty");
  std::vector<double> sorted(sq_dist.data(), sq_dist.data() + sq_dist.size());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() <= 0.0) {
    throw DegenerateGeometryError("all samples coincide with the query point");
  }
  double q_lo = quantile_sorted(sorted, 0.01);
  const double q_hi = quantile_sorted(sorted, 0.99);
  if (q_lo <= 0.0) {
    // Duplicates of x: fall back to the smallest positive squared distance.
    q_lo = *std::upper_bound(sorted.begin(), sorted.end(), 0.0);
  }
  const double t_min = q_lo / 4.0;
  const double t_max = 4.0 * std::max(q_hi, q_lo);
  if (!(t_max > t_min)) throw DegenerateGeometryError("distance quantiles give an empty bandwidth range");

  std::vector<double> grid(static_cast<std::size_t>(count));
  const double log_min = std::log(t_min);
  const double step = (std::log(t_max) - log_min) / (count - 1);
  for (int j = 0; j < count; ++j) grid[static_cast<std::size_t>(j)] = std::exp(log_min + step * j);
  grid.front() = t_min;
  grid.back() = t_max;
  return grid;
}

std::vector<double> make_grid(const PointCloud& cloud, const Point& x, int count) {
  validate_cloud(cloud);
  return make_grid_sq(squared_distances(x, cloud), count);
}

BandwidthScan select_bandwidth_curvature_sq(const Vector& sq_dist, const std::vector<double>& grid,
                                            double delta) {
  if (!(delta > 0.0)) throw DomainError("stabilizer delta must be positive");
  return scan(sq_dist, grid, delta, SelectionRule::curvature_ratio);
}

BandwidthScan select_bandwidth_curvature(const Point& x, const PointCloud& cloud,
                                         const std::vector<double>& grid, double delta) {
  validate_cloud(cloud);
  return select_bandwidth_curvature_sq(squared_distances(x, cloud), grid, delta);
}

BandwidthScan select_bandwidth_slope_max_sq(const Vector& sq_dist, const std::vector<double>& grid) {
  return scan(sq_dist, grid, kDefaultDelta, SelectionRule::slope_max);
}

BandwidthScan select_bandwidth_slope_max(const Point& x, const PointCloud& cloud,
                                         const std::vector<double>& grid) {
  validate_cloud(cloud);
  return select_bandwidth_slope_max_sq(squared_distances(x, cloud), grid);
}

}  // namespace dimest
