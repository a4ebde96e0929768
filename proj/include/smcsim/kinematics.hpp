#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "smcsim/robot_model.hpp"
#include "smcsim/types.hpp"

namespace smcsim {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws DimensionError unless `q` has one entry per joint of `model`.
void require_joint_count(const RobotModel& model, const JointVector& q, const char* what);

struct RollPitchYaw {
  double roll = 0.0;   // alpha, about x
  double pitch = 0.0;  // beta, about y
  double yaw = 0.0;    // gamma, about z
};

/// End-effector pose. The orientation is kept normalised.
struct Pose {
  Vector3d position = Vector3d::Zero();
  Quaterniond orientation = Quaterniond::Identity();

  Pose() = default;
  Pose(const Vector3d& p, const Quaterniond& q) : position(p), orientation(q.normalized()) {}

  /// Z-Y-X convention: R = Rz(yaw) Ry(pitch) Rx(roll).
  RollPitchYaw rpy() const;
  Isometry3d transform() const;
};

/// Single DH transform for a joint at angle `q`.
Isometry3d dh_transform(const DHJoint& joint, double q);

/// Base-to-frame transforms T_0^i for i = 0..n (entry 0 is the identity).
std::vector<Isometry3d> link_frames(const RobotModel& model, const JointVector& q);

Pose forward_kinematics(const RobotModel& model, const JointVector& q);

/// Geometric Jacobian of the end-effector: rows 0..2 linear (m/rad), rows 3..5 angular.
Jacobian jacobian(const RobotModel& model, const JointVector& q);

/// Rotation vector (axis * angle) of R_target * R_current^T.
Vector3d orientation_error(const Quaterniond& target, const Quaterniond& current);

/// Stacked [position error; rotation-vector error] of `target` relative to `current`.
Vector6d pose_error(const Pose& target, const Pose& current);

struct IkOptions {
  double damping = 0.05;
  double tolerance = 1e-5;
  int max_iterations = 200;
};

struct IkResult {
  JointVector q;
  bool converged = false;
  int iterations = 0;
  double error_norm = 0.0;
  /// Error norm after every accepted step, starting with the seed.
  std::vector<double> error_history;
};

/// Damped least-squares IK: dq = J^T (J J^T + lambda^2 I)^-1 err. A step is
/// accepted only when it lowers the pose-error norm; a rejected step doubles the
/// damping for the next attempt. Never throws on non-convergence.
IkResult dls_ik(const RobotModel& model, const Pose& target, const JointVector& seed, const IkOptions& options = {});

struct WorkspaceEstimate {
  double volume = 0.0;
  std::size_t occupied_voxels = 0;
  double voxel_size = 0.0;
  std::vector<Vector3d> voxel_centers;  // filled only when requested
};

/// Monte-Carlo reachable-position volume: joint configurations are sampled
/// uniformly within the limits and the FK positions are binned into cubic voxels.
WorkspaceEstimate estimate_workspace(const RobotModel& model, std::size_t sample_count, double voxel_size,
                                     std::uint64_t rng_seed, bool keep_centers = false);

double estimate_workspace_volume(const RobotModel& model, std::size_t sample_count, double voxel_size,
                                 std::uint64_t rng_seed);

/// Writes "x,y,z" rows of voxel centres.
void write_voxel_csv(std::ostream& out, const WorkspaceEstimate& estimate);

}  // namespace smcsim
