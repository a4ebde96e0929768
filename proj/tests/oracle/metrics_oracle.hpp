#pragma once

// Direct, loop-per-joint reference implementations of the tracking metrics.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "rnea.hpp"
#include "smcsim/metrics.hpp"

namespace oracle {

inline std::vector<double> joint_series(const smcsim::SimulationLog& log, int j) {
  std::vector<double> out;
  for (const auto& r : log.rows) out.push_back(r.q[j]);
  return out;
}

inline double rmse(const smcsim::SimulationLog& log, int j) {
  double sum = 0.0;
  for (const auto& r : log.rows) {
    const double e = r.q[j] - r.q_desired[j];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(log.rows.size()));
}

// Order-k backward differences written out term by term.
inline std::vector<double> nth_difference(const std::vector<double>& x, int k, double dt) {
  std::vector<double> out = x;
  for (int level = 0; level < k; ++level) {
    std::vector<double> next(out.size() - 1);
    for (std::size_t i = 0; i + 1 < out.size(); ++i) next[i] = (out[i + 1] - out[i]) / dt;
    out.swap(next);
  }
  return out;
}

inline double max_step(const std::vector<double>& x) {
  double best = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) best = std::max(best, std::fabs(x[i] - x[i - 1]));
  return best;
}

// order 1 = velocity continuity ... order 4 = snap
inline double smoothness(const smcsim::SimulationLog& log, int j, int order) {
  return max_step(nth_difference(joint_series(log, j), order, log.dt));
}

inline double steady_state(const smcsim::SimulationLog& log, int j, double window) {
  const double t_end = log.rows.back().t;
  double sum = 0.0;
  int count = 0;
  for (const auto& r : log.rows)
    if (r.t >= t_end - window - 1e-9 * log.dt) {
      sum += std::fabs(r.q[j] - r.q_desired[j]);
      ++count;
    }
  return sum / count;
}

inline double effort(const smcsim::SimulationLog& log) {
  double sum = 0.0;
  for (const auto& r : log.rows)
    for (int j = 0; j < r.tau.size(); ++j) sum += r.tau[j] * r.tau[j] * log.dt;
  return sum;
}

inline double wrap(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a > std::numbers::pi) a -= two_pi;
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

// FK through the oracle's own DH chain; roll, pitch, yaw from the ZYX matrix entries.
inline std::array<double, 6> cartesian(const smcsim::RobotModel& model, const smcsim::SimulationLog& log) {
  std::array<double, 6> sum{};
  for (const auto& r : log.rows) {
    const Frame A = frames(model, r.q).back();
    const Frame D = frames(model, r.q_desired).back();
    auto rpy = [](const Eigen::Matrix3d& R) {
      return std::array<double, 3>{std::atan2(R(2, 1), R(2, 2)),
                                   std::atan2(-R(2, 0), std::sqrt(R(2, 1) * R(2, 1) + R(2, 2) * R(2, 2))),
                                   std::atan2(R(1, 0), R(0, 0))};
    };
    const auto ra = rpy(A.R);
    const auto rd = rpy(D.R);
    for (int i = 0; i < 3; ++i) {
      const double dp = A.p[i] - D.p[i];
      sum[i] += dp * dp;
      const double da = wrap(ra[i] - rd[i]);
      sum[3 + i] += da * da;
    }
  }
  for (double& s : sum) s = std::sqrt(s / static_cast<double>(log.rows.size()));
  return sum;
}

}  // namespace oracle
