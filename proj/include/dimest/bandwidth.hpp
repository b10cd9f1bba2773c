#pragma once

#include <vector>

#include "dimest/types.hpp"

namespace dimest {

inline constexpr int kDefaultGridSize = 64;
inline constexpr double kDefaultDelta = 1e-3;

enum class SelectionRule { curvature_ratio, slope_max };

struct ScanPoint {
  double t;
  double S;
  double G;
  double G1;
  double G2;
  double rho;    // G1 / (|G2| + delta)
  double slope;  // (log S(2t) - log S(t)) / log 2
};

struct BandwidthScan {
  std::vector<double> grid;
  std::vector<ScanPoint> points;
  double delta = kDefaultDelta;
  SelectionRule rule = SelectionRule::curvature_ratio;
  int chosen_index = 0;
  double t_star = 0.0;
  double d_hat = 0.0;
};

// Log-spaced grid on [q_0.01 / 4, 4 q_0.99] of the squared distances from x.
std::vector<double> make_grid(const PointCloud& cloud, const Point& x, int count = kDefaultGridSize);
std::vector<double> make_grid_sq(const Vector& sq_dist, int count = kDefaultGridSize);

// Maximizes rho = G' / (|G''| + delta) over the grid; ties go to the smaller bandwidth.
BandwidthScan select_bandwidth_curvature(const Point& x, const PointCloud& cloud,
                                         const std::vector<double>& grid, double delta = kDefaultDelta);
BandwidthScan select_bandwidth_curvature_sq(const Vector& sq_dist, const std::vector<double>& grid,
                                            double delta = kDefaultDelta);

// Maximizes the numerical log-log slope; d_hat is twice the maximal slope.
BandwidthScan select_bandwidth_slope_max(const Point& x, const PointCloud& cloud,
                                         const std::vector<double>& grid);
BandwidthScan select_bandwidth_slope_max_sq(const Vector& sq_dist, const std::vector<double>& grid);

}  // namespace dimest
