#include "smcsim/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "csv_util.hpp"

namespace smcsim {

namespace {

constexpr std::array<double, 6> kQuintic{0, 0, 0, 10, -15, 6};
constexpr std::array<double, 10> kNonic{0, 0, 0, 0, 0, 126, -420, 540, -315, 70};

// d^order/du^order of sum c_k u^k.
double poly_derivative(std::span<const double> c, int order, double u) {
  double value = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= order; --k) {
    double falling = 1.0;
    for (int j = 0; j < order; ++j) falling *= k - j;
    value = value * u + c[k] * falling;
  }
  return value;
}

std::span<const double> coefficients(BlendProfile profile) {
  if (profile == BlendProfile::nonic) return kNonic;
  return kQuintic;
}

long long checked_steps(double T, double dt) {
  if (!(T > 0.0) || !std::isfinite(T)) throw TrajectoryError("segment duration must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw TrajectoryError("sample interval dt must be positive");
  if (dt > T) throw TrajectoryError("sample interval dt exceeds segment duration");
  const double ratio = T / dt;
  const long long steps = std::llround(ratio);
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-6)
    throw TrajectoryError("segment duration must be an integer multiple of dt");
  return steps;
}

// Appends samples k = first..steps of a segment starting at global index `offset`.
void append_segment(JointTrajectory& traj, const JointVector& q0, const JointVector& qf, double T, long long steps,
                    long long first, long long offset, BlendProfile profile) {
  const JointVector delta = qf - q0;
  for (long long k = first; k <= steps; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(steps);
    const BlendValue b = evaluate_blend(profile, u);
    TrajectorySample s;
    s.t = static_cast<double>(offset + k) * traj.dt;
    s.position = k == steps ? qf : JointVector(q0 + b.s * delta);
    s.velocity = (b.ds / T) * delta;
    s.acceleration = (b.d2s / (T * T)) * delta;
    traj.samples.push_back(std::move(s));
  }
}

}  // namespace

BlendProfile parse_blend_profile(std::string_view name) {
  if (name == "quintic") return BlendProfile::quintic;
  if (name == "nonic") return BlendProfile::nonic;
  throw TrajectoryError("unknown blend profile '" + std::string(name) + "'");
}

std::string_view to_string(BlendProfile profile) { return profile == BlendProfile::nonic ? "nonic" : "quintic"; }

BlendValue evaluate_blend(BlendProfile profile, double u) {
  const auto c = coefficients(profile);
  return {poly_derivative(c, 0, u), poly_derivative(c, 1, u), poly_derivative(c, 2, u), poly_derivative(c, 3, u),
          poly_derivative(c, 4, u)};
}

JointTrajectory blend_segment(const JointVector& q0, const JointVector& qf, double T, double dt, BlendProfile profile) {
  if (q0.size() != qf.size() || q0.size() == 0) throw TrajectoryError("segment endpoints differ in dimension");
  const long long steps = checked_steps(T, dt);
  JointTrajectory traj;
  traj.dt = dt;
  traj.samples.reserve(static_cast<std::size_t>(steps + 1));
  append_segment(traj, q0, qf, T, steps, 0, 0, profile);
  return traj;
}

JointTrajectory quintic_segment(const JointVector& q0, const JointVector& qf, double T, double dt) {
  return blend_segment(q0, qf, T, dt, BlendProfile::quintic);
}

JointTrajectory waypoint_trajectory(const std::vector<JointVector>& waypoints, const std::vector<double>& durations,
                                    double dt, BlendProfile profile) {
  if (waypoints.size() < 2) throw TrajectoryError("at least two waypoints are required");
  if (durations.size() != waypoints.size() - 1)
    throw TrajectoryError("expected " + std::to_string(waypoints.size() - 1) + " segment durations, got " +
                          std::to_string(durations.size()));
  for (const JointVector& w : waypoints) {
    if (w.size() != waypoints.front().size()) throw TrajectoryError("waypoints differ in dimension");
    if (!w.allFinite()) throw TrajectoryError("waypoints must be finite");
  }

  JointTrajectory traj;
  traj.dt = dt;
  long long offset = 0;
  for (std::size_t seg = 0; seg < durations.size(); ++seg) {
    const long long steps = checked_steps(durations[seg], dt);
    append_segment(traj, waypoints[seg], waypoints[seg + 1], durations[seg], steps, seg == 0 ? 0 : 1, offset, profile);
    offset += steps;
  }
  return traj;
}

JointTrajectory cartesian_to_joint(const RobotModel& model, const CartesianPath& path, const JointVector& seed,
                                   double dt, const IkOptions& ik) {
  if (path.waypoints.size() < 2) throw TrajectoryError("cartesian path needs at least two waypoints");
  if (path.segment_durations.size() != path.waypoints.size() - 1)
    throw TrajectoryError("cartesian path needs one duration per segment");
  require_joint_count(model, seed, "cartesian_to_joint");

  std::vector<Pose> poses;
  for (std::size_t seg = 0; seg < path.segment_durations.size(); ++seg) {
    const long long steps = checked_steps(path.segment_durations[seg], dt);
    const Pose& a = path.waypoints[seg];
    const Pose& b = path.waypoints[seg + 1];
    for (long long k = seg == 0 ? 0 : 1; k <= steps; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(steps);
      poses.emplace_back((1.0 - u) * a.position + u * b.position, a.orientation.slerp(u, b.orientation));
    }
  }

  const std::size_t count = poses.size();
  std::vector<JointVector> q;
  q.reserve(count);
  JointVector warm = seed;
  for (std::size_t k = 0; k < count; ++k) {
    const IkResult r = dls_ik(model, poses[k], warm, ik);
    if (!r.converged)
      throw TrajectoryError("IK did not converge at sample " + std::to_string(k) + " (t = " +
                            std::to_string(static_cast<double>(k) * dt) + " s, residual " +
                            std::to_string(r.error_norm) + ")");
    q.push_back(r.q);
    warm = r.q;
  }

  JointTrajectory traj;
  traj.dt = dt;
  traj.samples.resize(count);
  const int n = model.dof();
  for (std::size_t k = 0; k < count; ++k) {
    TrajectorySample& s = traj.samples[k];
    s.t = static_cast<double>(k) * dt;
    s.position = q[k];
    if (count == 1) {
      s.velocity = s.acceleration = JointVector::Zero(n);
      continue;
    }
    if (k == 0) {
      s.velocity = (q[1] - q[0]) / dt;
    } else if (k + 1 == count) {
      s.velocity = (q[k] - q[k - 1]) / dt;
    } else {
      s.velocity = (q[k + 1] - q[k - 1]) / (2.0 * dt);
    }
    if (count < 3) {
      s.acceleration = JointVector::Zero(n);
    } else {
      const std::size_t c = std::clamp<std::size_t>(k, 1, count - 2);
      s.acceleration = (q[c + 1] - 2.0 * q[c] + q[c - 1]) / (dt * dt);
    }
  }
  return traj;
}

Reference sample(const JointTrajectory& traj, double t) {
  if (traj.samples.empty()) throw TrajectoryError("sample: empty trajectory");
  const double t0 = traj.start_time();
  const double slack = 1e-9 * traj.dt;
  if (!(t >= t0 - slack) || !(t <= traj.end_time() + slack))
    throw TrajectoryError("sample: t = " + std::to_string(t) + " outside [" + std::to_string(t0) + ", " +
                          std::to_string(traj.end_time()) + "]");

  const double x = (t - t0) / traj.dt;
  const double nearest = std::round(x);
  const auto last = static_cast<double>(traj.samples.size() - 1);
  if (std::abs(x - nearest) < 1e-9) {
    const auto& s = traj.samples[static_cast<std::size_t>(std::clamp(nearest, 0.0, last))];
    return {s.position, s.velocity, s.acceleration};
  }
  const double lo = std::clamp(std::floor(x), 0.0, last - 1.0);
  const double w = x - lo;
  const auto& a = traj.samples[static_cast<std::size_t>(lo)];
  const auto& b = traj.samples[static_cast<std::size_t>(lo) + 1];
  return {(1.0 - w) * a.position + w * b.position, (1.0 - w) * a.velocity + w * b.velocity,
          (1.0 - w) * a.acceleration + w * b.acceleration};
}

void write_trajectory_csv(std::ostream& out, const JointTrajectory& traj) {
  const int n = traj.dof();
  out << "t";
  for (const char* prefix : {"q", "qd", "qdd"})
    for (int i = 1; i <= n; ++i) out << ',' << prefix << i;
  out << '\n';
  for (const TrajectorySample& s : traj.samples) {
    out << csv::format(s.t);
    for (const JointVector* v : {&s.position, &s.velocity, &s.acceleration})
      for (int i = 0; i < n; ++i) out << ',' << csv::format((*v)[i]);
    out << '\n';
  }
}

JointTrajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TrajectoryError("trajectory csv: missing header");
  const auto header = csv::split(line);
  if (header.empty() || header.front() != "t" || (header.size() - 1) % 3 != 0)
    throw TrajectoryError("trajectory csv: header must be t,q1..qn,qd1..qdn,qdd1..qddn");
  const int n = static_cast<int>((header.size() - 1) / 3);

  JointTrajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) throw TrajectoryError("trajectory csv: row width differs from header");
    TrajectorySample s;
    s.t = csv::parse(fields[0]);
    s.position.resize(n);
    s.velocity.resize(n);
    s.acceleration.resize(n);
    for (int i = 0; i < n; ++i) {
      s.position[i] = csv::parse(fields[1 + i]);
      s.velocity[i] = csv::parse(fields[1 + n + i]);
      s.acceleration[i] = csv::parse(fields[1 + 2 * n + i]);
    }
    traj.samples.push_back(std::move(s));
  }
  if (traj.samples.size() >= 2) traj.dt = traj.samples[1].t - traj.samples[0].t;
  for (std::size_t k = 1; k < traj.samples.size(); ++k)
    if (std::abs(traj.samples[k].t - traj.samples[k - 1].t - traj.dt) > 1e-9)
      throw TrajectoryError("trajectory csv: timestamps are not uniform");
  return traj;
}

}  // namespace smcsim
