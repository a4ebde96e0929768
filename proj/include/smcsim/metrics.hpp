#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smcsim/robot_model.hpp"
#include "smcsim/types.hpp"

namespace smcsim {

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LogRow {
  double t = 0.0;
  JointVector q;
  JointVector qd;  // actual velocity
  JointVector tau;
  JointVector sigma;
  double V = 0.0;
  JointVector q_desired;
  JointVector qd_desired;
};

/// Closed-loop history sampled every dt.
struct SimulationLog {
  double dt = 0.0;
  std::vector<LogRow> rows;
  bool diverged = false;
  std::optional<std::size_t> divergence_step;
  std::string divergence_message;

  int dof() const { return rows.empty() ? 0 : static_cast<int>(rows.front().q.size()); }
  bool operator==(const SimulationLog& other) const;
};

/// Finite-difference chain of the logged positions: v = dq/dt, a = dv/dt, j = da/dt, s = dj/dt.
struct DerivativeChain {
  std::vector<JointVector> velocity;
  std::vector<JointVector> acceleration;
  std::vector<JointVector> jerk;
  std::vector<JointVector> snap;
};

/// Maximum absolute difference between successive values of each derivative series.
struct SmoothnessMetrics {
  JointVector velocity_continuity;
  JointVector acceleration_profile;
  JointVector jerk;
  JointVector snap;
};

/// Per-axis RMSE of the end-effector position (m) and roll/pitch/yaw (rad).
struct CartesianRmse {
  std::array<double, 6> values{};  // x, y, z, alpha, beta, gamma

  double x() const { return values[0]; }
  double y() const { return values[1]; }
  double z() const { return values[2]; }
};

struct MetricsReport {
  JointVector rmse;
  SmoothnessMetrics smoothness;
  JointVector steady_state_error;
  CartesianRmse cartesian;
  double control_effort = 0.0;
};

struct Thresholds {
  double joint_rmse = 5e-3;          // rad
  double velocity_continuity = 1e-3;  // rad/s
  double acceleration_profile = 5e-3;  // rad/s^2
  double jerk = 5e-3;                 // rad/s^3
  double snap = 5e-3;                 // rad/s^4
  double cartesian_position = 5e-3;   // m
  double cartesian_angle = 5e-3;      // rad
};

/// Pass flags for every metric, per joint (or per Cartesian axis).
struct ThresholdResult {
  std::vector<bool> joint_rmse;
  std::vector<bool> velocity_continuity;
  std::vector<bool> acceleration_profile;
  std::vector<bool> jerk;
  std::vector<bool> snap;
  std::array<bool, 6> cartesian{};

  bool all_pass() const;
};

inline constexpr double kDefaultSteadyStateWindow = 0.5;

JointVector rmse_joint(const SimulationLog& log);
DerivativeChain derivative_chain(const SimulationLog& log);
SmoothnessMetrics smoothness_metrics(const SimulationLog& log);
JointVector steady_state_error(const SimulationLog& log, double window = kDefaultSteadyStateWindow);
CartesianRmse rmse_cartesian(const RobotModel& model, const SimulationLog& log);
/// Sum of |tau|^2 * dt over all rows.
double control_effort(const SimulationLog& log);

MetricsReport compute_report(const RobotModel& model, const SimulationLog& log,
                             double steady_state_window = kDefaultSteadyStateWindow);

ThresholdResult threshold_report(const MetricsReport& report, const Thresholds& thresholds = {});

/// Wraps an angle difference into (-pi, pi].
double wrap_angle(double angle);

nlohmann::json report_to_json(const MetricsReport& report);
nlohmann::json thresholds_to_json(const ThresholdResult& result);

}  // namespace smcsim
