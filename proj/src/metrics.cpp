#include "smcsim/metrics.hpp"

#include <cmath>
#include <numbers>

#include "smcsim/kinematics.hpp"

namespace smcsim {

namespace {

void require_rows(const SimulationLog& log, std::size_t minimum, const char* what) {
  if (log.rows.size() < minimum)
    throw MetricsError(std::string(what) + ": need at least " + std::to_string(minimum) + " log rows, got " +
                       std::to_string(log.rows.size()));
}

std::vector<JointVector> difference(const std::vector<JointVector>& series, double dt) {
  std::vector<JointVector> out;
  if (series.size() < 2) return out;
  out.reserve(series.size() - 1);
  for (std::size_t k = 1; k < series.size(); ++k) out.push_back((series[k] - series[k - 1]) / dt);
  return out;
}

JointVector max_successive_difference(const std::vector<JointVector>& series, int n) {
  JointVector out = JointVector::Zero(n);
  for (std::size_t k = 1; k < series.size(); ++k) out = out.cwiseMax((series[k] - series[k - 1]).cwiseAbs());
  return out;
}

std::vector<bool> below(const JointVector& values, double limit) {
  std::vector<bool> out;
  for (Eigen::Index i = 0; i < values.size(); ++i) out.push_back(values[i] < limit);
  return out;
}

nlohmann::json to_json(const JointVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

bool SimulationLog::operator==(const SimulationLog& other) const {
  if (dt != other.dt || diverged != other.diverged || divergence_step != other.divergence_step ||
      rows.size() != other.rows.size())
    return false;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const LogRow& a = rows[k];
    const LogRow& b = other.rows[k];
    if (a.t != b.t || a.V != b.V || a.q != b.q || a.qd != b.qd || a.tau != b.tau || a.sigma != b.sigma ||
        a.q_desired != b.q_desired || a.qd_desired != b.qd_desired)
      return false;
  }
  return true;
}

bool ThresholdResult::all_pass() const {
  for (const auto* flags : {&joint_rmse, &velocity_continuity, &acceleration_profile, &jerk, &snap})
    for (bool f : *flags)
      if (!f) return false;
  for (bool f : cartesian)
    if (!f) return false;
  return true;
}

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  double wrapped = std::remainder(angle, 2.0 * pi);
  if (wrapped <= -pi) wrapped += 2.0 * pi;
  return wrapped;
}

JointVector rmse_joint(const SimulationLog& log) {
  require_rows(log, 1, "rmse_joint");
  const int n = log.dof();
  JointVector sum = JointVector::Zero(n);
  for (const LogRow& r : log.rows) sum += (r.q - r.q_desired).cwiseAbs2();
  return (sum / static_cast<double>(log.rows.size())).cwiseSqrt();
}

DerivativeChain derivative_chain(const SimulationLog& log) {
  require_rows(log, 5, "derivative_chain");
  std::vector<JointVector> q;
  q.reserve(log.rows.size());
  for (const LogRow& r : log.rows) q.push_back(r.q);
  DerivativeChain chain;
  chain.velocity = difference(q, log.dt);
  chain.acceleration = difference(chain.velocity, log.dt);
  chain.jerk = difference(chain.acceleration, log.dt);
  chain.snap = difference(chain.jerk, log.dt);
  return chain;
}

SmoothnessMetrics smoothness_metrics(const SimulationLog& log) {
  const DerivativeChain chain = derivative_chain(log);
  const int n = log.dof();
  return {max_successive_difference(chain.velocity, n), max_successive_difference(chain.acceleration, n),
          max_successive_difference(chain.jerk, n), max_successive_difference(chain.snap, n)};
}

JointVector steady_state_error(const SimulationLog& log, double window) {
  require_rows(log, 1, "steady_state_error");
  const double t_end = log.rows.back().t;
  const double duration = t_end - log.rows.front().t;
  if (!(window >= 0.0) || window > duration + 1e-9)
    throw MetricsError("steady_state_error: window of " + std::to_string(window) + " s exceeds log duration of " +
                       std::to_string(duration) + " s");
  const double t_start = t_end - window - 1e-9 * log.dt;
  JointVector sum = JointVector::Zero(log.dof());
  std::size_t count = 0;
  for (const LogRow& r : log.rows) {
    if (r.t < t_start) continue;
    sum += (r.q - r.q_desired).cwiseAbs();
    ++count;
  }
  return sum / static_cast<double>(count);
}

CartesianRmse rmse_cartesian(const RobotModel& model, const SimulationLog& log) {
  require_rows(log, 1, "rmse_cartesian");
  std::array<double, 6> sum{};
  for (const LogRow& r : log.rows) {
    const Pose actual = forward_kinematics(model, r.q);
    const Pose desired = forward_kinematics(model, r.q_desired);
    const Vector3d dp = actual.position - desired.position;
    const RollPitchYaw a = actual.rpy();
    const RollPitchYaw d = desired.rpy();
    const std::array<double, 6> diff{dp.x(),
                                     dp.y(),
                                     dp.z(),
                                     wrap_angle(a.roll - d.roll),
                                     wrap_angle(a.pitch - d.pitch),
                                     wrap_angle(a.yaw - d.yaw)};
    for (int i = 0; i < 6; ++i) sum[i] += diff[i] * diff[i];
  }
  CartesianRmse out;
  for (int i = 0; i < 6; ++i) out.values[i] = std::sqrt(sum[i] / static_cast<double>(log.rows.size()));
  return out;
}

double control_effort(const SimulationLog& log) {
  require_rows(log, 1, "control_effort");
  double effort = 0.0;
  for (const LogRow& r : log.rows) effort += r.tau.squaredNorm() * log.dt;
  return effort;
}

MetricsReport compute_report(const RobotModel& model, const SimulationLog& log, double steady_state_window) {
  MetricsReport report;
  report.rmse = rmse_joint(log);
  report.smoothness = smoothness_metrics(log);
  report.steady_state_error = steady_state_error(log, steady_state_window);
  report.cartesian = rmse_cartesian(model, log);
  report.control_effort = control_effort(log);
  return report;
}

ThresholdResult threshold_report(const MetricsReport& report, const Thresholds& limits) {
  ThresholdResult out;
  out.joint_rmse = below(report.rmse, limits.joint_rmse);
  out.velocity_continuity = below(report.smoothness.velocity_continuity, limits.velocity_continuity);
  out.acceleration_profile = below(report.smoothness.acceleration_profile, limits.acceleration_profile);
  out.jerk = below(report.smoothness.jerk, limits.jerk);
  out.snap = below(report.smoothness.snap, limits.snap);
  for (int i = 0; i < 6; ++i)
    out.cartesian[i] = report.cartesian.values[i] < (i < 3 ? limits.cartesian_position : limits.cartesian_angle);
  return out;
}

nlohmann::json report_to_json(const MetricsReport& report) {
  const auto& c = report.cartesian.values;
  return {{"rmse_joint", to_json(report.rmse)},
          {"velocity_continuity", to_json(report.smoothness.velocity_continuity)},
          {"acceleration_profile", to_json(report.smoothness.acceleration_profile)},
          {"jerk", to_json(report.smoothness.jerk)},
          {"snap", to_json(report.smoothness.snap)},
          {"steady_state_error", to_json(report.steady_state_error)},
          {"rmse_cartesian", {{"x", c[0]}, {"y", c[1]}, {"z", c[2]}, {"alpha", c[3]}, {"beta", c[4]}, {"gamma", c[5]}}},
          {"control_effort", report.control_effort}};
}

nlohmann::json thresholds_to_json(const ThresholdResult& result) {
  return {{"joint_rmse", result.joint_rmse},
          {"velocity_continuity", result.velocity_continuity},
          {"acceleration_profile", result.acceleration_profile},
          {"jerk", result.jerk},
          {"snap", result.snap},
          {"cartesian", std::vector<bool>(result.cartesian.begin(), result.cartesian.end())},
          {"all_pass", result.all_pass()}};
}

}  // namespace smcsim
