#include "smcsim/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>
#include <unordered_set>

namespace smcsim {

void require_joint_count(const RobotModel& model, const JointVector& q, const char* what) {
  if (q.size() != model.dof())
    throw DimensionError(std::string(what) + ": expected " + std::to_string(model.dof()) + " joint values, got " +
                         std::to_string(q.size()));
}

RollPitchYaw Pose::rpy() const {
  const Matrix3d R = orientation.toRotationMatrix();
  RollPitchYaw out;
  out.roll = std::atan2(R(2, 1), R(2, 2));
  out.pitch = std::atan2(-R(2, 0), std::hypot(R(2, 1), R(2, 2)));
  out.yaw = std::atan2(R(1, 0), R(0, 0));
  return out;
}

Isometry3d Pose::transform() const {
  Isometry3d T = Isometry3d::Identity();
  T.linear() = orientation.toRotationMatrix();
  T.translation() = position;
  return T;
}

Isometry3d dh_transform(const DHJoint& joint, double q) {
  const double theta = q + joint.theta_offset;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(joint.alpha), sa = std::sin(joint.alpha);
  Isometry3d T = Isometry3d::Identity();
  T.matrix() << ct, -st * ca, st * sa, joint.a * ct,  //
      st, ct * ca, -ct * sa, joint.a * st,             //
      0.0, sa, ca, joint.d,                            //
      0.0, 0.0, 0.0, 1.0;
  return T;
}

std::vector<Isometry3d> link_frames(const RobotModel& model, const JointVector& q) {
  require_joint_count(model, q, "link_frames");
  std::vector<Isometry3d> frames;
  frames.reserve(model.dof() + 1);
  frames.push_back(Isometry3d::Identity());
  for (int i = 0; i < model.dof(); ++i) frames.push_back(frames.back() * dh_transform(model.dh.joints[i], q[i]));
  return frames;
}

Pose forward_kinematics(const RobotModel& model, const JointVector& q) {
  const auto frames = link_frames(model, q);
  const Isometry3d& T = frames.back();
  return Pose(T.translation(), Quaterniond(T.linear()));
}

Jacobian jacobian(const RobotModel& model, const JointVector& q) {
  const auto frames = link_frames(model, q);
  const int n = model.dof();
  const Vector3d p_end = frames.back().translation();
  Jacobian J(6, n);
  for (int j = 0; j < n; ++j) {
    const Vector3d z = frames[j].linear().col(2);
    J.block<3, 1>(0, j) = z.cross(p_end - frames[j].translation());
    J.block<3, 1>(3, j) = z;
  }
  return J;
}

Vector3d orientation_error(const Quaterniond& target, const Quaterniond& current) {
  Quaterniond delta = target * current.conjugate();
  if (delta.w() < 0.0) delta.coeffs() = -delta.coeffs();
  const Eigen::AngleAxisd aa(delta.normalized());
  return aa.axis() * aa.angle();
}

Vector6d pose_error(const Pose& target, const Pose& current) {
  Vector6d err;
  err.head<3>() = target.position - current.position;
  err.tail<3>() = orientation_error(target.orientation, current.orientation);
  return err;
}

IkResult dls_ik(const RobotModel& model, const Pose& target, const JointVector& seed, const IkOptions& options) {
  require_joint_count(model, seed, "dls_ik");
  const JointVector lo = model.position_min();
  const JointVector hi = model.position_max();

  IkResult result;
  result.q = seed;
  Vector6d err = pose_error(target, forward_kinematics(model, seed));
  result.error_norm = err.norm();
  result.error_history.push_back(result.error_norm);

  if (!target.position.allFinite() || !target.orientation.coeffs().allFinite()) return result;

  double lambda = options.damping;
  int attempts = 0;
  while (result.error_norm >= options.tolerance && attempts < options.max_iterations) {
    ++attempts;
    const Jacobian J = jacobian(model, result.q);
    const Eigen::Matrix<double, 6, 6> JJt = J * J.transpose() + lambda * lambda * Eigen::Matrix<double, 6, 6>::Identity();
    const Vector6d y = JJt.ldlt().solve(err);
    const JointVector candidate = (result.q + J.transpose() * y).cwiseMax(lo).cwiseMin(hi);
    const Vector6d candidate_err = pose_error(target, forward_kinematics(model, candidate));
    const double candidate_norm = candidate_err.norm();

    if (candidate_norm < result.error_norm) {
      result.q = candidate;
      err = candidate_err;
      result.error_norm = candidate_norm;
      result.error_history.push_back(candidate_norm);
      lambda = std::max(options.damping, 0.5 * lambda);
    } else {
      lambda = std::max(2.0 * lambda, 1e-6);
      if (lambda > 1e6) break;
    }
  }
  result.iterations = attempts;
  result.converged = result.error_norm < options.tolerance;
  return result;
}

namespace {

std::uint64_t voxel_key(const Vector3d& p, double voxel_size) {
  constexpr std::int64_t kOffset = std::int64_t{1} << 20;
  constexpr std::uint64_t kMask = (std::uint64_t{1} << 21) - 1;
  std::uint64_t key = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const auto cell = static_cast<std::int64_t>(std::floor(p[axis] / voxel_size)) + kOffset;
    key = (key << 21) | (static_cast<std::uint64_t>(cell) & kMask);
  }
  return key;
}

Vector3d voxel_center(std::uint64_t key, double voxel_size) {
  constexpr std::int64_t kOffset = std::int64_t{1} << 20;
  constexpr std::uint64_t kMask = (std::uint64_t{1} << 21) - 1;
  Vector3d c;
  for (int axis = 2; axis >= 0; --axis) {
    const auto cell = static_cast<std::int64_t>(key & kMask) - kOffset;
    c[axis] = (static_cast<double>(cell) + 0.5) * voxel_size;
    key >>= 21;
  }
  return c;
}

}  // namespace

WorkspaceEstimate estimate_workspace(const RobotModel& model, std::size_t sample_count, double voxel_size,
                                     std::uint64_t rng_seed, bool keep_centers) {
  if (sample_count == 0) throw std::invalid_argument("estimate_workspace: sample_count must be positive");
  if (!(voxel_size > 0.0)) throw std::invalid_argument("estimate_workspace: voxel_size must be positive");

  const int n = model.dof();
  std::mt19937_64 rng(rng_seed);
  std::vector<std::uniform_real_distribution<double>> joint_dist;
  for (const JointLimit& l : model.limits.joints) joint_dist.emplace_back(l.position_min, l.position_max);

  std::unordered_set<std::uint64_t> occupied;
  occupied.reserve(sample_count / 2);
  JointVector q(n);
  for (std::size_t s = 0; s < sample_count; ++s) {
    for (int i = 0; i < n; ++i) q[i] = joint_dist[i](rng);
    Isometry3d T = Isometry3d::Identity();
    for (int i = 0; i < n; ++i) T = T * dh_transform(model.dh.joints[i], q[i]);
    occupied.insert(voxel_key(T.translation(), voxel_size));
  }

  WorkspaceEstimate out;
  out.voxel_size = voxel_size;
  out.occupied_voxels = occupied.size();
  out.volume = static_cast<double>(occupied.size()) * voxel_size * voxel_size * voxel_size;
  if (keep_centers) {
    std::vector<std::uint64_t> keys(occupied.begin(), occupied.end());
    std::sort(keys.begin(), keys.end());
    out.voxel_centers.reserve(keys.size());
    for (std::uint64_t k : keys) out.voxel_centers.push_back(voxel_center(k, voxel_size));
  }
  return out;
}

double estimate_workspace_volume(const RobotModel& model, std::size_t sample_count, double voxel_size,
                                 std::uint64_t rng_seed) {
  return estimate_workspace(model, sample_count, voxel_size, rng_seed).volume;
}

void write_voxel_csv(std::ostream& out, const WorkspaceEstimate& estimate) {
  out << "x,y,z\n";
  for (const Vector3d& c : estimate.voxel_centers) out << c.x() << ',' << c.y() << ',' << c.z() << '\n';
}

}  // namespace smcsim
