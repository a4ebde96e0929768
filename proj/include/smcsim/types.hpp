#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace smcsim {

/// Upper bound on the number of joints. Joint-space vectors and matrices use
/// Eigen's bounded dynamic storage so the simulation loop never allocates.
inline constexpr int kMaxJoints = 12;

using JointVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxJoints, 1>;
using JointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxJoints, kMaxJoints>;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, kMaxJoints>;
using LinearJacobian = Eigen::Matrix<double, 3, Eigen::Dynamic, 0, 3, kMaxJoints>;

using Eigen::Isometry3d;
using Eigen::Matrix3d;
using Eigen::Quaterniond;
using Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;

}  // namespace smcsim
