#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "smcsim/controllers.hpp"
#include "smcsim/kinematics.hpp"
#include "smcsim/robot_model.hpp"
#include "smcsim/types.hpp"

namespace smcsim {

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrajectorySample {
  double t = 0.0;
  JointVector position;
  JointVector velocity;
  JointVector acceleration;
};

/// Uniformly sampled joint-space reference.
struct JointTrajectory {
  double dt = 0.0;
  std::vector<TrajectorySample> samples;

  int dof() const { return samples.empty() ? 0 : static_cast<int>(samples.front().position.size()); }
  double start_time() const { return samples.front().t; }
  double end_time() const { return samples.back().t; }
  double duration() const { return samples.empty() ? 0.0 : end_time() - start_time(); }
};

/// Rest-to-rest blend shape used between waypoints.
///   quintic: zero velocity and acceleration at both ends.
///   nonic:   additionally zero jerk and snap at both ends.
enum class BlendProfile { quintic, nonic };

BlendProfile parse_blend_profile(std::string_view name);
std::string_view to_string(BlendProfile profile);

/// Normalised blend s(u), u in [0, 1], and its first four derivatives in u.
struct BlendValue {
  double s, ds, d2s, d3s, d4s;
};
BlendValue evaluate_blend(BlendProfile profile, double u);

/// Rest-to-rest motion from q0 to qf over T seconds, sampled every dt
/// (T must be an integer multiple of dt). Both endpoints are included.
JointTrajectory quintic_segment(const JointVector& q0, const JointVector& qf, double T, double dt);
JointTrajectory blend_segment(const JointVector& q0, const JointVector& qf, double T, double dt, BlendProfile profile);

/// Concatenated rest-to-rest segments through the waypoints.
JointTrajectory waypoint_trajectory(const std::vector<JointVector>& waypoints, const std::vector<double>& durations,
                                    double dt, BlendProfile profile = BlendProfile::quintic);

struct CartesianPath {
  std::vector<Pose> waypoints;
  std::vector<double> segment_durations;
};

/// Interpolates the path (linear position, slerp orientation), solves DLS IK at
/// every sample warm-started from the previous one and differentiates the result
/// numerically. Throws TrajectoryError naming the first sample where IK fails.
JointTrajectory cartesian_to_joint(const RobotModel& model, const CartesianPath& path, const JointVector& seed,
                                   double dt, const IkOptions& ik = {});

/// Reference at time t: the stored sample when t is on the grid, linear
/// interpolation between neighbours otherwise.
Reference sample(const JointTrajectory& traj, double t);

/// Header "t,q1..qn,qd1..qdn,qdd1..qddn" (position, velocity, acceleration).
void write_trajectory_csv(std::ostream& out, const JointTrajectory& traj);
JointTrajectory read_trajectory_csv(std::istream& in);

}  // namespace smcsim
