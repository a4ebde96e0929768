#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "smcsim/dynamics.hpp"
#include "smcsim/harness.hpp"
#include "smcsim/robot_model.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return SMCSIM_SOURCE_DIR; }

inline smcsim::JointVector random_q(const smcsim::RobotModel& m, std::mt19937_64& rng) {
  smcsim::JointVector q(m.dof());
  for (int i = 0; i < m.dof(); ++i) {
    std::uniform_real_distribution<double> d(m.limits.joints[i].position_min, m.limits.joints[i].position_max);
    q[i] = d(rng);
  }
  return q;
}

inline smcsim::JointVector random_vector(int n, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-scale, scale);
  smcsim::JointVector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline smcsim::RobotModel without_gravity(smcsim::RobotModel m) {
  m.gravity.setZero();
  return m;
}

// Short two-segment joint-space scenario on the default arm.
inline smcsim::Scenario short_scenario(double segment = 0.5) {
  smcsim::Scenario s;
  s.name = "short";
  s.model = smcsim::ur5e_like();
  s.trajectory.profile = smcsim::BlendProfile::nonic;
  smcsim::JointVector a(6), b(6);
  a << 0.0, -0.3, 0.3, -0.2, 0.2, 0.0;
  b << 0.05, -0.35, 0.35, -0.15, 0.25, 0.05;
  s.trajectory.waypoints = {a, b, a};
  s.trajectory.durations = {segment, segment};
  s.initial_offset = smcsim::JointVector::Zero(6);
  s.mbsmc = smcsim::SlidingParams::uniform(6, 100.0, 1.0, 60.0);
  s.nmbsmc = smcsim::SlidingParams::uniform(6, 100.0, 1.0, 60.0);
  s.pid = smcsim::PidGains::uniform(6, 100.0, 10.0, 0.1);
  return s;
}

}  // namespace testing
