#include "dimest/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace dimest {

std::string_view to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::gaussian_local:
      return "gaussian_local";
    case EstimatorMethod::gaussian_global:
      return "gaussian_global";
    case EstimatorMethod::correlation_integral:
      return "correlation_integral";
    case EstimatorMethod::knn_ratio:
      return "knn_ratio";
  }
  return "unknown";
}

double local_dim_from_sq(const Vector& sq_dist, double t) {
  const double log_s1 = log_kernel_sum_sq(sq_dist, t).log_S;
  const double log_s2 = log_kernel_sum_sq(sq_dist, 2.0 * t).log_S;
  // S is nondecreasing in t; clamp the last-ulp noise when the two sums coincide.
  return std::max(0.0, 2.0 * (log_s2 - log_s1) / std::numbers::ln2);
}

DimEstimate local_dim_estimate(const Point& x, const PointCloud& cloud, double t) {
  detail::check_bandwidth(t);
  validate_cloud(cloud);
  const Vector sq = squared_distances(x, cloud);
  return {local_dim_from_sq(sq, t), EstimatorMethod::gaussian_local, t, 0.0};
}

namespace {

// Off-diagonal sums of exp(-|X_i - X_j|^2 / t) for several bandwidths in one pass over
// the pairs. Each row is reduced first, then rows are added in index order.
std::vector<double> pair_kernel_sums(const PointCloud& cloud, const std::vector<double>& ts) {
  const Eigen::Index n = cloud.rows();
  std::vector<double> total(ts.size(), 0.0);
  std::vector<double> row(ts.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double sq = (cloud.row(i) - cloud.row(j)).squaredNorm();
      for (std::size_t k = 0; k < ts.size(); ++k) row[k] += std::exp(-sq / ts[k]);
    }
    for (std::size_t k = 0; k < ts.size(); ++k) total[k] += row[k];
  }
  return total;
}

double log_full_sum(double off_diagonal, Eigen::Index n) {
  const double nd = static_cast<double>(n);
  return std::log(nd + 2.0 * off_diagonal) - 2.0 * std::log(nd);
}

}  // namespace

double global_log_kernel_sum(const PointCloud& cloud, double t) {
  detail::check_bandwidth(t);
  validate_cloud(cloud);
  return log_full_sum(pair_kernel_sums(cloud, {t})[0], cloud.rows());
}

DimEstimate global_dim_estimate(const PointCloud& cloud, double t1, double t2) {
  detail::check_bandwidth(t1);
  detail::check_bandwidth(t2);
  if (!(t1 < t2)) throw DomainError("global estimator requires t1 < t2");
  validate_cloud(cloud);
  const auto sums = pair_kernel_sums(cloud, {t1, t2});
  const double log_s1 = log_full_sum(sums[0], cloud.rows());
  const double log_s2 = log_full_sum(sums[1], cloud.rows());
  const double d_hat = std::max(0.0, 2.0 * (log_s2 - log_s1) / (std::log(t2) - std::log(t1)));
  return {d_hat, EstimatorMethod::gaussian_global, t1, t2};
}

double correlation_integral(const PointCloud& cloud, double r) {
  if (!(r > 0.0)) throw DomainError("correlation radius must be positive");
  validate_cloud(cloud);
  const Eigen::Index n = cloud.rows();
  const double r2 = r * r;
  long long close_pairs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if ((cloud.row(i) - cloud.row(j)).squaredNorm() <= r2) ++close_pairs;
    }
  }
  const double nd = static_cast<double>(n);
  return (nd + 2.0 * static_cast<double>(close_pairs)) / (nd * nd);
}

DimEstimate knn_dim_estimate(const Point& x, const PointCloud& cloud, int k,
                             std::optional<Eigen::Index> self_index) {
  validate_cloud(cloud);
  check_point_matches(x, cloud);
  if (k < 2) throw DomainError("kNN estimator requires k >= 2");
  if (self_index && (*self_index < 0 || *self_index >= cloud.rows())) {
    throw DomainError("self index out of range");
  }

  std::vector<std::pair<double, Eigen::Index>> dist;
  dist.reserve(static_cast<std::size_t>(cloud.rows()));
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    if (self_index && i == *self_index) continue;
    dist.emplace_back((cloud.row(i).transpose() - x).norm(), i);
  }
  if (static_cast<std::size_t>(k) > dist.size()) {
    throw DomainError("k = " + std::to_string(k) + " exceeds the " + std::to_string(dist.size()) +
                      " available neighbors");
  }
  std::sort(dist.begin(), dist.end());

  const double r_k = dist[static_cast<std::size_t>(k - 1)].first;
  const double r_half = dist[static_cast<std::size_t>((k + 1) / 2 - 1)].first;
  if (r_half <= 0.0 || !(r_k > r_half)) {
    throw DegenerateGeometryError("kNN radii r_k = " + std::to_string(r_k) + " and r_ceil(k/2) = " +
                                  std::to_string(r_half) + " give no usable ratio");
  }
  return {std::numbers::ln2 / std::log(r_k / r_half), EstimatorMethod::knn_ratio,
          static_cast<double>(k), 0.0};
}

int default_knn_k(Eigen::Index n) {
  const int k = static_cast<int>(std::ceil(2.0 * std::log(static_cast<double>(n))));
  // Tiny clouds cannot honor the lower clip; n - 1 wins there.
  return std::min(std::max(k, 4), static_cast<int>(n) - 1);
}

}  // namespace dimest
