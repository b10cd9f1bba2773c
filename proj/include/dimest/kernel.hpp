#pragma once

#include <cmath>
#include <string>

#include "dimest/types.hpp"

namespace dimest {

// Gaussian kernel sum at one bandwidth. S is kept alongside log_S because S underflows
// for small t long before log_S loses precision.
template <typename Scalar>
struct KernelEvalT {
  Scalar t;
  Scalar log_S;
  Scalar S;
};
using KernelEval = KernelEvalT<double>;

// G(tau) = log S(x, e^tau) and its first two derivatives in tau.
template <typename Scalar>
struct GDerivativesT {
  Scalar G;
  Scalar G1;
  Scalar G2;
};
using GDerivatives = GDerivativesT<double>;

namespace detail {

template <typename Scalar>
void check_bandwidth(Scalar t) {
  if (!(t > Scalar(0)) || !std::isfinite(t)) {
    throw DomainError("bandwidth must be positive and finite, got " + std::to_string(double(t)));
  }
}

}  // namespace detail

// K_t(x, y) = exp(-|x - y|^2 / t)
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar gaussian_kernel(const Eigen::MatrixBase<DerivedX>& x,
                                          const Eigen::MatrixBase<DerivedY>& y,
                                          typename DerivedX::Scalar t) {
  detail::check_bandwidth(t);
  if (x.size() != y.size()) throw ShapeError("kernel arguments differ in dimension");
  using Scalar = typename DerivedX::Scalar;
  const VectorT<Scalar> xv = x;
  const VectorT<Scalar> yv = y;
  return std::exp(-(xv - yv).squaredNorm() / t);
}

// |x - X_i|^2 for every row of the cloud. Computed once and reused across bandwidths.
template <typename DerivedX, typename DerivedC>
VectorT<typename DerivedC::Scalar> squared_distances(const Eigen::MatrixBase<DerivedX>& x,
                                                     const Eigen::MatrixBase<DerivedC>& cloud) {
  if (cloud.rows() < 1) throw DomainError("point cloud is empty");
  check_point_matches(x, cloud);
  using Scalar = typename DerivedC::Scalar;
  const VectorT<Scalar> xv = x;
  VectorT<Scalar> out(cloud.rows());
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    out[i] = (cloud.row(i).transpose() - xv).squaredNorm();
  }
  return out;
}

// log((1/n) sum_i exp(-sq_dist_i / t)), shifted by the largest exponent. Summation runs in
// index order so results are bit-reproducible.
template <typename Derived>
KernelEvalT<typename Derived::Scalar> log_kernel_sum_sq(const Eigen::MatrixBase<Derived>& sq_dist,
                                                        typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  detail::check_bandwidth(t);
  const Eigen::Index n = sq_dist.size();
  if (n < 1) throw DomainError("point cloud is empty");
  const Scalar min_sq = sq_dist.minCoeff();
  Scalar acc(0);
  for (Eigen::Index i = 0; i < n; ++i) acc += std::exp(-(sq_dist[i] - min_sq) / t);
  const Scalar log_S = -min_sq / t + std::log(acc) - std::log(Scalar(n));
  return {t, log_S, std::exp(log_S)};
}

template <typename DerivedX, typename DerivedC>
KernelEvalT<typename DerivedC::Scalar> log_kernel_sum(const Eigen::MatrixBase<DerivedX>& x,
                                                      const Eigen::MatrixBase<DerivedC>& cloud,
                                                      typename DerivedC::Scalar t) {
  detail::check_bandwidth(t);
  return log_kernel_sum_sq(squared_distances(x, cloud), t);
}

// With u_i = sq_dist_i / e^tau and w_i proportional to e^{-u_i}:
//   G1 = <u>,  G2 = <u^2 - u> - <u>^2 = Var_w(u) - <u>.
// The variance is accumulated around the mean to avoid cancellation.
template <typename Derived>
GDerivativesT<typename Derived::Scalar> g_derivatives_sq(const Eigen::MatrixBase<Derived>& sq_dist,
                                                         typename Derived::Scalar log_t) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = sq_dist.size();
  if (n < 1) throw DomainError("point cloud is empty");
  if (!std::isfinite(log_t)) throw DomainError("log bandwidth must be finite");
  const Scalar t = std::exp(log_t);
  detail::check_bandwidth(t);

  const Scalar min_sq = sq_dist.minCoeff();
  Scalar w_sum(0);
  Scalar wu_sum(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar u = sq_dist[i] / t;
    const Scalar w = std::exp(-(sq_dist[i] - min_sq) / t);
    w_sum += w;
    wu_sum += w * u;
  }
  const Scalar mean_u = wu_sum / w_sum;
  Scalar var_acc(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar u = sq_dist[i] / t;
    const Scalar w = std::exp(-(sq_dist[i] - min_sq) / t);
    const Scalar dev = u - mean_u;
    var_acc += w * dev * dev;
  }
  const Scalar var_u = var_acc / w_sum;

  // Same expression as log_kernel_sum_sq, so G matches it bit for bit.
  const Scalar G = -min_sq / t + std::log(w_sum) - std::log(Scalar(n));
  return {G, mean_u, var_u - mean_u};
}

template <typename DerivedX, typename DerivedC>
GDerivativesT<typename DerivedC::Scalar> g_derivatives(const Eigen::MatrixBase<DerivedX>& x,
                                                       const Eigen::MatrixBase<DerivedC>& cloud,
                                                       typename DerivedC::Scalar log_t) {
  return g_derivatives_sq(squared_distances(x, cloud), log_t);
}

}  // namespace dimest
