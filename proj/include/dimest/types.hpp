#pragma once

#include <Eigen/Dense>

#include "dimest/errors.hpp"

namespace dimest {

// n x N sample matrix, one sample per row.
template <typename Scalar>
using PointCloudT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using PointCloud = PointCloudT<double>;
using Point = PointT<double>;
using Vector = VectorT<double>;

template <typename Derived>
void validate_cloud(const Eigen::MatrixBase<Derived>& cloud) {
  if (cloud.rows() < 1) throw DomainError("point cloud is empty");
  if (cloud.cols() < 1) throw DomainError("point cloud has zero ambient dimension");
  if (!cloud.allFinite()) throw DomainError("point cloud has non-finite coordinates");
}

template <typename DerivedX, typename DerivedC>
void check_point_matches(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedC>& cloud) {
  if (x.size() != cloud.cols()) {
    throw ShapeError("query point has dimension " + std::to_string(x.size()) + ", cloud has " +
                     std::to_string(cloud.cols()));
  }
}

}  // namespace dimest
