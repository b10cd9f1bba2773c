#pragma once

#include <optional>
#include <string_view>

#include "dimest/kernel.hpp"
#include "dimest/types.hpp"

namespace dimest {

enum class EstimatorMethod { gaussian_local, gaussian_global, correlation_integral, knn_ratio };

std::string_view to_string(EstimatorMethod m);

struct DimEstimate {
  double d_hat = 0.0;
  EstimatorMethod method = EstimatorMethod::gaussian_local;
  // Bandwidth t (local), lower bandwidth t1 (global), radius, or neighbor count k.
  double t_or_k = 0.0;
  // Upper bandwidth t2 for the global estimator, otherwise unused.
  double t2 = 0.0;
};

// 2 (log S(x,2t) - log S(x,t)) / log 2 from precomputed squared distances.
double local_dim_from_sq(const Vector& sq_dist, double t);

DimEstimate local_dim_estimate(const Point& x, const PointCloud& cloud, double t);

// log S(t) with S(t) = n^-2 sum_{i,j} K_t(X_i, X_j), diagonal included.
double global_log_kernel_sum(const PointCloud& cloud, double t);

DimEstimate global_dim_estimate(const PointCloud& cloud, double t1, double t2);

double correlation_integral(const PointCloud& cloud, double r);

// Nearest-neighbor ratio estimator log 2 / log(r_k / r_ceil(k/2)). When the query is a
// member of the cloud pass its row as self_index so it is excluded from its own neighbors.
DimEstimate knn_dim_estimate(const Point& x, const PointCloud& cloud, int k,
                             std::optional<Eigen::Index> self_index = std::nullopt);

// ceil(2 log n) clipped to [4, n - 1].
int default_knn_k(Eigen::Index n);

}  // namespace dimest
